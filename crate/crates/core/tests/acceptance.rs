//! End-to-end acceptance checks against the worked examples. Prints one line per
//! criterion and exits nonzero if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cnecc::convcode::free_distance;
use cnecc::decoder::{decode, DecodeMode, DecoderConfig};
use cnecc::errorsim::{run_ber, BerConfig};
use cnecc::gf2poly::{Gf2Poly, PolyMatrix};
use cnecc::subspace::{
    check_distributed, element_count_v0_nonzero, free_distance_condition, min_window_length,
    ReferenceTable, Window, WindowSpace,
};
use cnecc::{encode, Generator};
use common::{bits, fixture, oracle_weight, random_instance, words};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gen(s: &str) -> Generator {
    s.parse().unwrap()
}

fn c1_transfer_algebra() {
    let ex1 = fixture("example1.json");
    assert_eq!(ex1.output_generator("t1", None).unwrap(), gen("101 0011"));
    assert_eq!(ex1.output_generator("t2", None).unwrap(), gen("101 111"));
    let bf = fixture("butterfly.json");
    assert_eq!(
        bf.output_generator("t1", None).unwrap(),
        gen("10111 001011")
    );
    assert_eq!(
        bf.output_generator("t2", None).unwrap(),
        gen("001011 11001")
    );

    let gi = PolyMatrix::parse_rows(&[vec!["101", "111"]]).unwrap();
    let m = ex1.transfer("t1").unwrap().m().clone();
    assert_eq!(
        m,
        PolyMatrix::parse_rows(&[vec!["1", "1"], vec!["0", "11"]]).unwrap()
    );
    assert_eq!(
        gi.mul(&m).unwrap(),
        PolyMatrix::parse_rows(&[vec!["101", "0011"]]).unwrap()
    );
}

fn c2_metrics() {
    for (g, d) in [
        ("101 111", 5),
        ("101 0011", 4),
        ("1011 00111", 6),
        ("1011 1111", 6),
    ] {
        assert_eq!(free_distance(&gen(g)).unwrap(), d, "d_free of {g}");
    }
}

type TableRows = BTreeSet<(String, u32, BTreeSet<String>)>;

fn table_rows(t: &ReferenceTable) -> TableRows {
    t.iter()
        .map(|(w, e)| {
            (
                w.to_bits(t.omega()),
                e.weight,
                e.preimages.iter().map(ToString::to_string).collect(),
            )
        })
        .collect()
}

fn expected(rows: &[(&str, u32, &[&str])]) -> TableRows {
    rows.iter()
        .map(|(w, wt, pre)| {
            (
                w.to_string(),
                *wt,
                pre.iter().map(|s| s.to_string()).collect(),
            )
        })
        .collect()
}

fn c3_reference_tables() {
    let ex1 = fixture("example1.json");
    let start = Instant::now();
    let t2 = ReferenceTable::build(ex1.transfer("t1").unwrap(), 2).unwrap();
    assert!(start.elapsed() < Duration::from_secs(1));
    assert_eq!(
        table_rows(&t2),
        expected(&[
            ("00 00 00", 0, &["00000"]),
            ("11 00 00", 1, &["10000"]),
            ("01 01 00", 1, &["01000"]),
            ("01 00 00", 1, &["00100", "00010", "00001"]),
            ("10 01 00", 2, &["11000"]),
            ("10 00 00", 2, &["10100", "10010", "10001"]),
            ("00 01 00", 2, &["01100", "01010", "01001"]),
            ("11 01 00", 3, &["11100", "11010", "11001"]),
        ])
    );

    let bf = fixture("butterfly.json");
    let start = Instant::now();
    let t7 = ReferenceTable::build(bf.transfer("t1").unwrap(), 1).unwrap();
    assert!(start.elapsed() < Duration::from_secs(1));
    assert_eq!(
        table_rows(&t7),
        expected(&[
            ("00 00", 0, &["000000000"]),
            ("11 01", 1, &["100000000"]),
            ("10 00", 1, &["001000000"]),
            (
                "01 00",
                1,
                &[
                    "010000000",
                    "000100000",
                    "000010000",
                    "000001000",
                    "000000100"
                ]
            ),
            ("01 01", 2, &["101000000"]),
            (
                "10 01",
                2,
                &[
                    "110000000",
                    "100100000",
                    "100010000",
                    "100001000",
                    "100000100"
                ]
            ),
            (
                "11 00",
                2,
                &[
                    "011000000",
                    "001100000",
                    "001010000",
                    "001001000",
                    "001000100"
                ]
            ),
            (
                "00 01",
                3,
                &[
                    "111000000",
                    "101100000",
                    "101010000",
                    "101001000",
                    "101000100"
                ]
            ),
        ])
    );

    let start = Instant::now();
    let t8 = ReferenceTable::build(bf.transfer("t2").unwrap(), 1).unwrap();
    assert!(start.elapsed() < Duration::from_secs(1));
    assert_eq!(
        table_rows(&t8),
        expected(&[
            ("00 00", 0, &["000000000"]),
            ("10 10", 1, &["100000000"]),
            ("11 00", 1, &["010000000"]),
            ("01 00", 1, &["000000001"]),
            (
                "10 00",
                1,
                &["000100000", "000010000", "000001000", "000000010"]
            ),
            ("01 10", 2, &["110000000"]),
            ("11 10", 2, &["100000001"]),
            (
                "00 10",
                2,
                &["100100000", "100010000", "100001000", "100000010"]
            ),
        ])
    );
}

fn c4_window_space() {
    let space = WindowSpace::new(&gen("101 0011"), 2).unwrap();
    let rows: Vec<(String, String)> = space
        .elements()
        .iter()
        .map(|(x, w)| (cnecc::decoder::bits_to_string(x), w.to_bits(2)))
        .collect();
    let table1 = [
        ("000", "00 00 00"),
        ("001", "00 00 10"),
        ("010", "00 10 00"),
        ("011", "00 10 10"),
        ("100", "10 00 11"),
        ("101", "10 00 01"),
        ("110", "10 10 11"),
        ("111", "10 10 01"),
    ];
    let table1: Vec<(String, String)> = table1
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(rows, table1);

    let g1 = gen("1011 00111");
    let g2 = gen("1011 1111");
    assert_eq!(element_count_v0_nonzero(&g1, 6).unwrap(), 64);
    assert_eq!(element_count_v0_nonzero(&g2, 3).unwrap(), 8);
    let s1 = WindowSpace::new(&g1, 6).unwrap();
    for w in [
        "10 00 11 11 01 00 00",
        "10 00 01 01 00 10 11",
        "10 10 11 10 00 00 00",
        "10 10 01 10 11 11 11",
    ] {
        assert!(s1.contains(&Window::from_words(words(w))), "{w}");
    }
    let s2 = WindowSpace::new(&g2, 3).unwrap();
    for w in ["11 01 11 11", "11 01 00 01", "11 10 10 00", "11 10 01 10"] {
        assert!(s2.contains(&Window::from_words(words(w))), "{w}");
    }
}

fn c5_intersection_search() {
    let ex1 = fixture("example1.json");
    let t1 = ex1.transfer("t1").unwrap();
    assert_eq!(min_window_length(&gen("101 0011"), t1, 8), Ok(2));
    let bf = fixture("butterfly.json");
    for sink in ["t1", "t2"] {
        let g = bf.output_generator(sink, None).unwrap();
        let t = bf.transfer(sink).unwrap();
        assert_eq!(t.l_t(), 1);
        assert_eq!(min_window_length(&g, t, 8), Ok(2), "{sink}");
        // Minimality: the window at l = l_t = 1 still collides.
        assert!(min_window_length(&g, t, 1).is_err(), "{sink}");
    }
}

fn c6_distributed_checks() {
    let ex2 = fixture("example2.json");
    let g1 = ex2.output_generator("t1", None).unwrap();
    let g2 = ex2.output_generator("t2", None).unwrap();
    let t1 = ex2.transfer("t1").unwrap();
    let t2 = ex2.transfer("t2").unwrap();
    assert!(check_distributed(&g1, t1, 6).unwrap());
    assert!(check_distributed(&g2, t2, 3).unwrap());
    assert!(!check_distributed(&g1, t1, 5).unwrap());
    assert!(!check_distributed(&g2, t2, 2).unwrap());

    let ex1 = fixture("example1.json");
    let g = ex1.output_generator("t1", None).unwrap();
    assert!(!check_distributed(&g, ex1.transfer("t1").unwrap(), 2).unwrap());

    let r = free_distance_condition(&g1, t1, 20).unwrap();
    assert_eq!(r.bound, 9);
    assert_eq!(r.d_free, Some(6));
    assert!(!r.satisfied);
    assert!(!r.catastrophic);
}

const ALPHA_TRACE: [&[&str]; 7] = [
    &[
        "0 1 1 (0)",
        "2 1 2 ∞",
        "0 3 1 (0)",
        "2 3 2 ∞",
        "0 1 3 (0)",
        "2 1 0 (2)",
        "0 3 3 (0)",
        "2 3 0 ∞",
    ],
    &[
        "1 1 3 ∞",
        "3 1 0 (3)",
        "1 3 3 ∞",
        "0 0 2 (2)",
        "3 3 0 ∞",
        "1 1 1 ∞",
        "3 1 2 ∞",
        "1 3 1 ∞",
        "0 0 0 (2)",
        "3 3 2 ∞",
    ],
    &[
        "0 0 2 (3)",
        "0 2 0 (2)",
        "0 0 0 (2)",
        "0 0 0 (3)",
        "0 2 2 (2)",
        "0 0 2 (2)",
    ],
    &[
        "0 2 3 (3)",
        "2 0 2 ∞",
        "0 0 1 (2)",
        "0 0 3 (3)",
        "2 2 2 ∞",
        "0 2 1 (2)",
        "0 2 1 (3)",
        "2 0 0 (4)",
        "0 0 3 (2)",
        "0 0 1 (3)",
        "2 2 0 ∞",
        "0 2 3 (2)",
    ],
    &[
        "2 3 0 ∞",
        "0 1 1 (2)",
        "0 3 3 (3)",
        "2 1 2 ∞",
        "2 1 0 (5)",
        "0 0 0 (4)",
        "0 3 1 (2)",
        "0 1 3 (3)",
        "2 3 2 ∞",
    ],
    &["1 1 3 ∞", "3 3 2 ∞", "0 0 0 (4)", "3 1 0 (5)", "1 3 1 ∞"],
    &["0 0 0 (4)"],
];

const BETA_TRACE: [&[&str]; 7] = [
    &[
        "1 0 1 ∞",
        "3 0 2 ∞",
        "1 2 1 ∞",
        "3 2 2 ∞",
        "1 0 3 ∞",
        "3 0 0 (1)",
        "1 2 3 ∞",
        "3 2 0 ∞",
    ],
    &["0 0 1 (1)", "0 0 3 (1)"],
    &["0 1 0 (1)", "0 3 0 (1)", "0 1 2 (1)", "0 3 2 (1)"],
    &[
        "1 0 2 ∞",
        "3 0 1 ∞",
        "1 2 2 ∞",
        "3 2 1 ∞",
        "1 0 0 (2)",
        "3 0 3 ∞",
        "1 2 0 ∞",
        "3 2 3 ∞",
    ],
    &["0 0 0 (2)"],
    &["0 0 0 (2)"],
    &["0 0 0 (2)"],
];

fn trace_matches(r: &cnecc::DecodeResult, golden: &[&[&str]]) {
    assert_eq!(r.trace.len(), golden.len());
    for (i, (w, g)) in r.trace.iter().zip(golden).enumerate() {
        assert_eq!((w.start, w.end), (i, i + 2));
        let got: Vec<String> = w.rows.iter().map(ToString::to_string).collect();
        assert_eq!(got, *g, "window [{},{}]", w.start, w.end);
    }
}

fn c7_golden_traces() {
    let ex1 = fixture("example1.json");
    let g = ex1.output_generator("t1", None).unwrap();
    let table = ReferenceTable::build(ex1.transfer("t1").unwrap(), 2).unwrap();

    let y_alpha = words("00 01 01 11 11 11 00 11 01");
    let cfg = DecoderConfig::new(2).trace(true);
    let r = decode(&y_alpha, &g, &table, &cfg).unwrap();
    trace_matches(&r, &ALPHA_TRACE);
    assert_eq!(r.decoded_input, bits("101001"));
    assert_eq!(r.total_weight, 4);

    let y_beta = words("01 00 01 00 11 11 00 11 01");
    let cfg = DecoderConfig::new(2)
        .trace(true)
        .mode(DecodeMode::Distributed);
    let r = decode(&y_beta, &g, &table, &cfg).unwrap();
    trace_matches(&r, &BETA_TRACE);
    assert_eq!(r.decoded_input, bits("101001"));
    assert_eq!(r.total_weight, 2);
    let schedule: Vec<(usize, usize, String)> = r
        .emissions
        .iter()
        .map(|e| (e.window_start, e.window_end, e.bit_string()))
        .collect();
    let want: Vec<(usize, usize, String)> = [
        (0, 2, "1"),
        (3, 5, "010"),
        (4, 6, "0"),
        (5, 7, "1"),
        (6, 8, "0"),
    ]
    .iter()
    .map(|&(a, b, s)| (a, b, s.to_string()))
    .collect();
    assert_eq!(schedule, want);
}

fn c8_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut separated_checked = 0;
    for i in 0..200 {
        let inst = random_instance(&mut rng);
        let cfg = DecoderConfig::new(inst.l).input_length(inst.x.len());
        let got = decode(&inst.y, &inst.g, &inst.table, &cfg).ok();
        let oracle = oracle_weight(&inst.y, &inst.g, &inst.table, inst.x.len());
        assert_eq!(got.as_ref().map(|r| r.total_weight), oracle, "instance {i}");
        // Errors are generated separated and table-covered, so the decode must
        // recover x whenever the pairwise check licenses distributed decoding.
        if matches!(check_distributed(&inst.g, &inst.transfer, inst.l), Ok(true)) {
            assert_eq!(got.unwrap().decoded_input, inst.x, "instance {i}");
            separated_checked += 1;
        }
    }
    assert!(separated_checked > 0);
}

fn c9_ber_properties() {
    let bf = fixture("butterfly.json");
    let sinks: Vec<_> = bf
        .sinks
        .iter()
        .map(|s| bf.sink_setup(s, 2, None).unwrap())
        .collect();
    let zero = BerConfig {
        l: 2,
        p_grid: vec![0.0],
        trials: 200,
        x_len: 64,
        seed: 1,
    };
    let r = run_ber(&sinks, &zero).unwrap();
    assert!(r
        .rows
        .iter()
        .all(|row| row.bit_errors == 0 && row.ber == 0.0));

    let grid: Vec<f64> = (0..13).map(|i| 0.02 + 0.04 * i as f64).collect();
    let cfg = BerConfig {
        l: 2,
        p_grid: grid.clone(),
        trials: 10_000,
        x_len: 64,
        seed: 2024,
    };
    let report = run_ber(&sinks, &cfg).unwrap();
    assert!(report.warnings.is_empty());
    for sink in ["t1", "t2"] {
        let ber: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.sink == sink)
            .map(|r| r.ber)
            .collect();
        assert_eq!(ber.len(), grid.len());
        let inversions = ber.windows(2).filter(|w| w[1] < w[0]).count();
        assert!(inversions <= 2, "{sink}: {ber:?}");
    }
    let at_04 = run_ber(
        &sinks,
        &BerConfig {
            p_grid: vec![0.4],
            ..cfg.clone()
        },
    )
    .unwrap();
    for (low, high) in report.rows[..2].iter().zip(&at_04.rows) {
        assert!(
            low.ber < high.ber,
            "{}: {} vs {}",
            low.sink,
            low.ber,
            high.ber
        );
    }

    let small = BerConfig {
        p_grid: vec![0.02, 0.2, 0.5],
        trials: 2_000,
        ..cfg
    };
    let first = run_ber(&sinks, &small).unwrap();
    let second = run_ber(&sinks, &small).unwrap();
    assert_eq!(first.to_csv(), second.to_csv());
}

fn poly() -> impl Strategy<Value = Gf2Poly> {
    proptest::collection::vec(any::<bool>(), 0..80).prop_map(Gf2Poly::from_coeffs)
}

fn c10_algebra_properties() {
    const CASES: u32 = 25_000;
    let runner = || {
        TestRunner::new(Config {
            cases: CASES,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let checks = std::cell::Cell::new(0u32);
    runner()
        .run(&(poly(), poly(), poly()), |(a, b, c)| {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a + &a).is_zero());
            checks.set(checks.get() + 1);
            Ok(())
        })
        .unwrap();
    runner()
        .run(
            &proptest::collection::vec(proptest::collection::vec(poly(), 2), 1..4),
            |rows| {
                let m = PolyMatrix::from_rows(rows).unwrap();
                let back = m
                    .slices()
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let mut p = PolyMatrix::from_bit_matrix(s);
                        for r in 0..p.rows() {
                            for c in 0..p.cols() {
                                let e = p.get(r, c).shifted(i);
                                p.set(r, c, e);
                            }
                        }
                        p
                    })
                    .reduce(|a, b| a.add(&b).unwrap())
                    .unwrap();
                prop_assert_eq!(back, m);
                checks.set(checks.get() + 1);
                Ok(())
            },
        )
        .unwrap();
    runner()
        .run(&(poly(), poly()), |(a, b)| {
            prop_assume!(!(a.is_zero() && b.is_zero()));
            let g = a.gcd(&b).unwrap();
            prop_assert!(a.div_rem(&g).unwrap().1.is_zero());
            prop_assert!(b.div_rem(&g).unwrap().1.is_zero());
            checks.set(checks.get() + 1);
            Ok(())
        })
        .unwrap();
    let gens = ["101 111", "101 0011", "1011 00111", "10111 11001"].map(gen);
    runner()
        .run(
            &(
                0..gens.len(),
                proptest::collection::vec(any::<(bool, bool)>(), 1..40),
            ),
            |(k, pairs)| {
                let g = &gens[k];
                let x1: Vec<bool> = pairs.iter().map(|p| p.0).collect();
                let x2: Vec<bool> = pairs.iter().map(|p| p.1).collect();
                let sum: Vec<bool> = pairs.iter().map(|p| p.0 ^ p.1).collect();
                let lhs = encode(g, &sum, true);
                let rhs: Vec<u64> = encode(g, &x1, true)
                    .iter()
                    .zip(encode(g, &x2, true))
                    .map(|(a, b)| a ^ b)
                    .collect();
                prop_assert_eq!(lhs, rhs);
                checks.set(checks.get() + 1);
                Ok(())
            },
        )
        .unwrap();
    assert!(
        checks.get() >= 4 * CASES,
        "only {} checks ran",
        checks.get()
    );
}

type Criterion = (u32, &'static str, Duration, fn());

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "transfer algebra",
            Duration::from_secs(1),
            c1_transfer_algebra,
        ),
        (2, "free distances", Duration::from_secs(5), c2_metrics),
        (
            3,
            "reference tables",
            Duration::from_secs(3),
            c3_reference_tables,
        ),
        (4, "window spaces", Duration::from_secs(5), c4_window_space),
        (
            5,
            "intersection search",
            Duration::from_secs(5),
            c5_intersection_search,
        ),
        (
            6,
            "distributed checks",
            Duration::from_secs(30),
            c6_distributed_checks,
        ),
        (
            7,
            "golden decode traces",
            Duration::from_secs(1),
            c7_golden_traces,
        ),
        (
            8,
            "oracle equivalence",
            Duration::from_secs(120),
            c8_oracle_equivalence,
        ),
        (
            9,
            "BER properties",
            Duration::from_secs(300),
            c9_ber_properties,
        ),
        (
            10,
            "algebra properties",
            Duration::from_secs(30),
            c10_algebra_properties,
        ),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let took = start.elapsed();
        let verdict = match outcome {
            Ok(()) if took <= limit => "PASS".to_string(),
            Ok(()) => format!("FAIL (over {limit:?})"),
            Err(_) => "FAIL".to_string(),
        };
        if verdict != "PASS" {
            failed += 1;
        }
        println!(
            "[{verdict}] criterion {n}: {name} ({:.2}s)",
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
