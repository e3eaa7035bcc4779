use super::*;
use crate::error::Error;
use crate::trace::RunTrace;

fn cfg(text: &str) -> RunConfig {
    RunConfig::from_text(text).unwrap()
}

#[test]
fn synthetic_runs_are_byte_identical() {
    let c = cfg("experiment = synthetic\nmethod = zosa\nseed = 7\nN = 15\n");
    let a = run(&c).unwrap().trace;
    let b = run(&c).unwrap().trace;
    assert_eq!(a.body_csv(), b.body_csv());
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn metadata_alone_reproduces_the_run() {
    for text in [
        "experiment = synthetic\nmethod = zogd\nseed = 3\nmax_zo_calls = 400\nnoise = uniform\nDelta = 1e-6\n",
        "experiment = geom_median\nmethod = zosa\nm = 4\nn = 2\nR = 10\nN = 12\ntopology = cycle\n",
        "experiment = synthetic\nmethod = mzosa\ncurvature_min = 0.2\nphases = 2\n",
    ] {
        let first = run(&cfg(text)).unwrap().trace;
        let reparsed = RunTrace::from_csv(&first.to_csv()).unwrap();
        let again = run(&RunConfig::from_trace_metadata(&reparsed).unwrap()).unwrap().trace;
        assert_eq!(first.body_csv(), again.body_csv(), "{text}");
    }
}

#[test]
fn median_run_starts_off_consensus_and_contracts() {
    let c = cfg("experiment = geom_median\nmethod = zosa\nm = 5\nn = 3\nR = 10\nN = 200\n");
    let t = run(&c).unwrap().trace;
    let first = t.rows[0].consensus_sq_norm.unwrap();
    let last = t.last().unwrap().consensus_sq_norm.unwrap();
    assert!(first > 0.0);
    assert!(last < 0.01 * first, "{first} -> {last}");
    assert_eq!(t.last().unwrap().comm_rounds, 200);
    assert_eq!(t.last().unwrap().fo_calls, 200);
}

#[test]
fn restarts_without_strong_convexity_name_mu() {
    match RunConfig::from_text("experiment = synthetic\nmethod = mzosa\nmu = 0\n") {
        Err(Error::Config { field, .. }) => assert_eq!(field, "mu"),
        other => panic!("unexpected {other:?}"),
    }
    match RunConfig::from_text("experiment = nesterov\nmethod = mzosa\n") {
        Err(Error::Config { field, .. }) => assert_eq!(field, "mu"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn bound_column() {
    let c = cfg("experiment = synthetic\nmethod = zosa\nN = 30\ncheckpoints = 30\n");
    let report = run_with(&c, None, true).unwrap();
    let rows = &report.trace.rows;
    assert!(rows[0].bound.is_none());
    let bounds: Vec<f64> = rows[1..].iter().map(|r| r.bound.unwrap()).collect();
    assert!(bounds.windows(2).all(|w| w[1] <= w[0]));
    let prep = prepare(&c, None).unwrap();
    let sched = schedule_for(&c, &prep.problem, 30).unwrap();
    let terms = crate::sliding::BoundTerms::from_parts(&sched, &prep.problem.setup, &prep.problem.estimator);
    let expected = crate::sliding::theoretical_bound(&terms, crate::sliding::BoundAt::Convex { n_outer: 30 });
    assert_eq!(*bounds.last().unwrap(), expected);
    let gd = cfg("experiment = synthetic\nmethod = gd\nN = 5\n");
    assert!(run_with(&gd, None, true).is_err());
}

#[test]
fn budgets_stop_within_one_iteration_and_show_overshoot() {
    let c = cfg("experiment = synthetic\nmethod = zosa\nN = 400\nmax_zo_calls = 3000\ncheckpoints = 400\nl1 = 0.5\n");
    let report = run(&c).unwrap();
    assert!(report.budget_hit);
    let rows = &report.trace.rows;
    assert!(rows.last().unwrap().zo_calls >= 3000);
    assert!(rows[rows.len() - 2].zo_calls < 3000);
    assert_eq!(report.trace.meta("budget_hit"), Some("true"));
    assert!(rows.windows(2).all(|w| w[0].zo_calls <= w[1].zo_calls && w[0].fo_calls <= w[1].fo_calls));
}

#[test]
fn zo_budget_sizes_zosa_and_zogd_equally() {
    let zosa = run(&cfg("experiment = nesterov\nmethod = zosa\nn = 10\nmax_zo_calls = 4000\n")).unwrap();
    let zogd = run(&cfg("experiment = nesterov\nmethod = zogd\nn = 10\nmax_zo_calls = 4000\n")).unwrap();
    assert!(zosa.trace.last().unwrap().zo_calls <= 4000);
    assert_eq!(zogd.trace.last().unwrap().zo_calls, 4000);
    assert_eq!(zosa.trace.meta("reference_source"), zogd.trace.meta("reference_source"));
}

#[test]
fn logreg_reads_data_through_the_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..40 {
        let y = if i % 3 == 0 { "+1" } else { "-1" };
        text.push_str(&format!("{y} 1:{} 3:{}\n", (i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
    }
    std::fs::write(dir.path().join("tiny.svm"), text).unwrap();
    std::env::set_var(DATA_ENV, dir.path());
    let c = cfg("experiment = logreg\nmethod = zosa\ndata = tiny.svm\nN = 20\n");
    let t = run(&c).unwrap().trace;
    assert_eq!(t.meta("derived.dataset_m"), Some("40"));
    assert_eq!(t.meta("derived.dataset_n"), Some("3"));
    assert!(t.meta("note.nonconforming_set").is_some());
    let missing = cfg("experiment = logreg\nmethod = zosa\ndata = nope.svm\nN = 2\n");
    match run(&missing) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "data"),
        other => panic!("unexpected {:?}", other.map(|r| r.x)),
    }
}

#[test]
fn graph_report() {
    let r = GraphReport::new(crate::network::Graph::star(3).unwrap()).unwrap();
    let text = r.to_text();
    assert!(text.contains("chi = 3.0000"));
    assert!(text.contains("m = 3"));
}
