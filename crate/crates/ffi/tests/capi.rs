//! Exercises the C ABI end to end through the exported symbols.

use std::ptr;

use superpolyak_ffi::*;

#[test]
fn compressed_sensing_solve_through_the_c_surface() {
    unsafe {
        let mut problem: *mut SpProblem = ptr::null_mut();
        let status = sp_problem_create(
            SpProblemKind::CompressedSensing,
            60,
            0,
            20,
            3,
            1.0,
            -1.0,
            false,
            SpEnsemble::Gaussian,
            5,
            &mut problem,
        );
        assert_eq!(status, SpStatus::Ok);
        assert_eq!(sp_problem_dim(problem), 60);

        let mut x0 = vec![0.0f64; 60];
        assert_eq!(
            sp_problem_initial_point(problem, x0.as_mut_ptr(), x0.len()),
            SpStatus::Ok
        );

        let mut opts = SpSolveOptions {
            eps: 0.0,
            omega: 0.0,
            gamma: 0.0,
            eta_est0: 0.0,
            eta_lb: 0.0,
            q: 0.0,
            tau_max: 0.0,
            max_outer: 0,
            fallback_budget: 0,
            max_oracle: 0,
        };
        assert_eq!(sp_solve_options_default(&mut opts), SpStatus::Ok);
        assert!(opts.eps > 0.0 && opts.omega > 1.0);

        let mut report: *mut SpReport = ptr::null_mut();
        let status = sp_solve(problem, ptr::null(), 0, &opts, &mut report);
        assert_eq!(status, SpStatus::Ok);
        assert_eq!(sp_report_status(report), SpRunStatus::Converged);
        assert!(sp_report_final_gap(report) <= opts.eps);

        let n = sp_report_solution_len(report);
        assert_eq!(n, 60);
        let mut solution = vec![0.0f64; n];
        assert_eq!(
            sp_report_solution(report, solution.as_mut_ptr(), n),
            SpStatus::Ok
        );
        let mut check = f64::NAN;
        assert_eq!(
            sp_problem_gap(problem, solution.as_ptr(), n, &mut check),
            SpStatus::Ok
        );
        assert!(check <= opts.eps);

        // History rows exist and carry strictly increasing call counts.
        let rows = sp_report_history_len(report);
        assert!(rows >= 2);
        let mut prev = 0u64;
        for idx in 0..rows {
            let mut row = SpHistoryRow {
                oracle_calls: 0,
                f_gap: 0.0,
                elapsed_sec: 0.0,
                step_kind: SpStepKind::Init,
            };
            assert_eq!(sp_report_history_row(report, idx, &mut row), SpStatus::Ok);
            if idx > 0 {
                assert!(row.oracle_calls > prev);
            }
            prev = row.oracle_calls;
        }

        let (mut f, mut g, mut mapping) = (0u64, 0u64, 0u64);
        assert_eq!(
            sp_report_counts(report, &mut f, &mut g, &mut mapping),
            SpStatus::Ok
        );
        assert_eq!(prev, f + g + mapping);

        sp_report_free(report);
        sp_problem_free(problem);
    }
}

#[test]
fn baseline_runs_through_the_c_surface() {
    unsafe {
        let mut problem: *mut SpProblem = ptr::null_mut();
        let status = sp_problem_create(
            SpProblemKind::PhaseRetrieval,
            10,
            0,
            40,
            0,
            1.0,
            -1.0,
            false,
            SpEnsemble::Gaussian,
            2,
            &mut problem,
        );
        assert_eq!(status, SpStatus::Ok);

        let mut report: *mut SpReport = ptr::null_mut();
        assert_eq!(
            sp_solve_baseline(problem, 1e-8, 1_000_000, &mut report),
            SpStatus::Ok
        );
        assert_eq!(sp_report_status(report), SpRunStatus::Converged);
        assert!(sp_report_final_gap(report) <= 1e-8);

        let (mut f, mut g, mut mapping) = (0u64, 0u64, 0u64);
        assert_eq!(
            sp_report_counts(report, &mut f, &mut g, &mut mapping),
            SpStatus::Ok
        );
        assert!(mapping > 0, "alternating projections count as mapping calls");
        assert_eq!(g, 0, "the baseline never touches the subgradient oracle");

        sp_report_free(report);
        sp_problem_free(problem);
    }
}

#[test]
fn invalid_arguments_surface_as_status_codes() {
    unsafe {
        // Null output pointer.
        assert_eq!(
            sp_problem_create(
                SpProblemKind::CompressedSensing,
                10,
                0,
                5,
                1,
                1.0,
                -1.0,
                false,
                SpEnsemble::Gaussian,
                1,
                ptr::null_mut(),
            ),
            SpStatus::NullPointer
        );

        // Bad shape (s > m).
        let mut problem: *mut SpProblem = ptr::null_mut();
        assert_eq!(
            sp_problem_create(
                SpProblemKind::CompressedSensing,
                10,
                0,
                5,
                9,
                1.0,
                -1.0,
                false,
                SpEnsemble::Gaussian,
                1,
                &mut problem,
            ),
            SpStatus::InvalidArgument
        );
        assert!(problem.is_null());

        // Null/no-op frees are safe.
        sp_problem_free(ptr::null_mut());
        sp_report_free(ptr::null_mut());

        // Buffer too small.
        let mut ok_problem: *mut SpProblem = ptr::null_mut();
        assert_eq!(
            sp_problem_create(
                SpProblemKind::CompressedSensing,
                20,
                0,
                8,
                2,
                1.0,
                -1.0,
                false,
                SpEnsemble::Gaussian,
                1,
                &mut ok_problem,
            ),
            SpStatus::Ok
        );
        let mut tiny = [0.0f64; 3];
        assert_eq!(
            sp_problem_initial_point(ok_problem, tiny.as_mut_ptr(), tiny.len()),
            SpStatus::BufferTooSmall
        );
        sp_problem_free(ok_problem);
    }

    // Status strings are static and non-empty.
    let msg = sp_strerror(SpStatus::InvalidArgument);
    assert!(!msg.is_null());
}

#[test]
fn generated_header_exists_and_exports_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("superpolyak.h");
    let text = std::fs::read_to_string(&header).expect("header generated at build time");
    for symbol in [
        "sp_problem_create",
        "sp_problem_free",
        "sp_solve",
        "sp_solve_baseline",
        "sp_report_final_gap",
        "sp_report_history_row",
        "sp_strerror",
        "typedef struct SpProblem SpProblem;",
        "typedef struct SpReport SpReport;",
    ] {
        assert!(text.contains(symbol), "header missing `{symbol}`");
    }
}
