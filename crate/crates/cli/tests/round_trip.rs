use std::path::PathBuf;

use proptest::prelude::*;

use frobtrace::curve::TraceMethod;
use frobtrace::group_lab::LemmaId;
use frobtrace::survey::{EllQuery, Target};
use frobtrace_cli::args::{BoundsCmd, GroupVerifyCmd, ReportCmd, SurveyCmd, TraceCmd};
use frobtrace_cli::{parse_invocation, Command};

const ODD_PRIMES: [u64; 8] = [3, 5, 7, 11, 13, 101, 7919, 1_000_003];

fn path() -> impl Strategy<Value = PathBuf> {
    "[a-z][a-z0-9_]{0,8}\\.(json|csv|txt)".prop_map(PathBuf::from)
}

fn method() -> impl Strategy<Value = TraceMethod> {
    prop_oneof![
        Just(TraceMethod::Auto),
        Just(TraceMethod::Exhaustive),
        Just(TraceMethod::Bsgs)
    ]
}

fn positive() -> impl Strategy<Value = f64> {
    (1e-6f64..1e6).prop_filter("finite", |v| v.is_finite())
}

fn command() -> impl Strategy<Value = Command> {
    let gv = (
        prop::sample::select(ODD_PRIMES.to_vec()),
        1usize..5,
        prop::sample::select(LemmaId::ALL.to_vec()),
        prop::option::of(-1000i64..1000),
        prop::option::of(positive()),
        prop::option::of(0u32..100),
        path(),
    )
        .prop_map(|(ell, g, lemma, t, z, xi, out)| {
            // These lemmas are stated for a target, so --t is mandatory.
            let needs_t = matches!(lemma, LemmaId::L5_1 | LemmaId::L5_3 | LemmaId::L5_4);
            let t = if needs_t { t.or(Some(0)) } else { t };
            Command::GroupVerify(GroupVerifyCmd {
                ell,
                g,
                lemma,
                t,
                z,
                xi,
                out,
            })
        });
    let trace = (
        path(),
        prop::sample::select(ODD_PRIMES.to_vec()),
        method(),
        any::<u64>(),
        prop::option::of(path()),
    )
        .prop_map(|(curves, p, method, seed, out)| {
            Command::Trace(TraceCmd {
                curves,
                p,
                method,
                seed,
                out,
            })
        });
    let target = prop_oneof![
        (-500i64..500).prop_map(Target::Exact),
        (0.0f64..1e4).prop_map(Target::UpTo)
    ];
    let ell = prop::option::of(prop_oneof![
        prop::sample::select(ODD_PRIMES.to_vec()).prop_map(EllQuery::Single),
        (0.0f64..1e6, 0.0f64..1e3).prop_map(|(y, u)| EllQuery::Window { y, u }),
        any::<bool>().prop_map(|clamp| EllQuery::Schedule { clamp }),
    ]);
    let survey = (
        (path(), 3u64..u64::MAX / 2, target, ell, positive()),
        (
            1usize..64,
            any::<u64>(),
            method(),
            1usize..100,
            100u64..100_000,
            prop::option::of(path()),
            path(),
        ),
    )
        .prop_map(
            |(
                (curves, x, target, ell, eps),
                (threads, seed, method, grid_steps, probe, cache, out),
            )| {
                Command::Survey(SurveyCmd {
                    curves,
                    x,
                    target,
                    ell,
                    eps,
                    threads,
                    seed,
                    method,
                    grid_steps,
                    probe,
                    cache,
                    out,
                })
            },
        );
    let bounds = (
        3.0f64..1e9,
        1.0f64..1e9,
        1usize..1000,
        1usize..6,
        any::<bool>(),
        positive(),
        positive(),
        path(),
    )
        .prop_map(|(a, span, steps, g, t0, constant, eps, out)| {
            Command::Bounds(BoundsCmd {
                a,
                b: a + span,
                steps,
                g,
                t0,
                constant,
                eps,
                out,
            })
        });
    let report = (prop::collection::vec(path(), 1..4), path())
        .prop_map(|(inputs, out)| Command::Report(ReportCmd { inputs, out }));
    prop_oneof![gv, trace, survey, bounds, report]
}

proptest! {
    #[test]
    fn parse_inverts_serialize(cmd in command()) {
        let argv = std::iter::once("frobtrace".to_string()).chain(cmd.to_args());
        let parsed = parse_invocation(argv).unwrap().command;
        prop_assert_eq!(parsed, cmd);
    }
}
