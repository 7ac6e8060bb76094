//! Frozen estimator values from `tests/oracle/estimators_oracle.py`.

use ndv_core::Method::{self, *};

pub struct Fixture {
    pub name: &'static str,
    pub f: &'static [(u64, u64)],
    pub population: u64,
    /// Interior Sichel root when the equation has one.
    pub sichel_g: Option<f64>,
    pub expected: &'static [(Method, f64)],
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "p01_gee_example",
        f: &[(1, 10), (2, 5)],
        population: 2000,
        sichel_g: None,
        expected: &[
            (Goodman, -50605.263157894737),
            (Gee, 105.0),
            (Eb, 105.0),
            (Chao, 25.0),
            (Shlosser, 758.74371859296482),
            (Jackknife, 24.5),
            (Sichel, 15.0),
            (Bootstrap, 19.192742497038269),
            (Ht, 21.228207791992165),
            (Mom1, 33.010927819816931),
            (Mom2, 31.286504962696884),
        ],
    },
    Fixture {
        name: "p02_no_singletons",
        f: &[(2, 5)],
        population: 1000,
        sichel_g: None,
        expected: &[
            (Goodman, -54500.0),
            (Gee, 5.0),
            (Eb, 15.0),
            (Chao, 5.0),
            (Shlosser, 5.0),
            (Jackknife, 5.0),
            (Sichel, 5.0),
            (Bootstrap, 5.536870912),
            (Ht, 5.5938699174732683),
            (Mom1, 6.2750048745798763),
            (Mom2, 5.9239033933492122),
        ],
    },
    Fixture {
        name: "p03_mixed_heavy",
        f: &[(1, 10), (18, 5)],
        population: 10000,
        sichel_g: None,
        expected: &[
            (Goodman, -2.1584118598631245e+37),
            (Gee, 105.0),
            (Eb, 105.0),
            (Chao, 15.0),
            (Shlosser, 178.89200792807619),
            (Jackknife, 24.9),
            (Sichel, 15.0),
            (Bootstrap, 18.660323424764778),
            (Ht, 20.728080751969918),
            (Mom1, 15.019278304531375),
            (Mom2, 15.014715993018786),
        ],
    },
    Fixture {
        name: "p04_sichel_solvable",
        f: &[(1, 50), (2, 10), (3, 10)],
        population: 10000,
        sichel_g: Some(0.70611229248173449),
        expected: &[
            (Goodman, 9910061.2244897959),
            (Gee, 520.0),
            (Eb, 520.0),
            (Chao, 195.0),
            (Shlosser, 3547.9185105289155),
            (Jackknife, 119.5),
            (Sichel, 239.81034744980905),
            (Bootstrap, 90.103337701863065),
            (Ht, 100.64281603886505),
            (Mom1, 131.3312009862066),
            (Mom2, 129.05400077668112),
        ],
    },
    Fixture {
        name: "p05_all_distinct",
        f: &[(1, 100)],
        population: 10000,
        sichel_g: None,
        expected: &[
            (Goodman, 10000.0),
            (Gee, 1000.0),
            (Eb, 1000.0),
            (Chao, 100.0),
            (Shlosser, 10000.0),
            (Jackknife, 199.0),
            (Sichel, 100.0),
            (Bootstrap, 136.60323412732295),
            (Ht, 157.28080741185043),
            (Mom1, 1e15),
            (Mom2, 10000.0),
        ],
    },
    Fixture {
        name: "p06_constant",
        f: &[(100, 1)],
        population: 10000,
        sichel_g: None,
        expected: &[
            (Goodman, -6.455638455301785e+241),
            (Gee, 1.0),
            (Eb, 11.0),
            (Chao, 1.0),
            (Shlosser, 1.0),
            (Jackknife, 1.0),
            (Sichel, 1.0),
            (Bootstrap, 1.0),
            (Ht, 1.0),
            (Mom1, 1.0),
            (Mom2, 1.0),
        ],
    },
    Fixture {
        name: "p07_tiny",
        f: &[(1, 2), (2, 1)],
        population: 50,
        sichel_g: None,
        expected: &[
            (Goodman, -154.16666666666667),
            (Gee, 8.0710678118654752),
            (Eb, 8.0710678118654752),
            (Chao, 5.0),
            (Shlosser, 20.489583333333333),
            (Jackknife, 4.5),
            (Sichel, 3.0),
            (Bootstrap, 3.6953125),
            (Ht, 3.9287795873567599),
            (Mom1, 6.6021855639633862),
            (Mom2, 4.9179688704183176),
        ],
    },
    Fixture {
        name: "p08_large_population",
        f: &[(1, 30), (2, 10), (3, 5), (5, 2)],
        population: 1000000,
        sichel_g: Some(0.66838865955230673),
        expected: &[
            (Goodman, 9.6530551973583552e+20),
            (Gee, 3481.1016151377546),
            (Eb, 3481.1016151377546),
            (Chao, 92.0),
            (Shlosser, 250706.225937043),
            (Jackknife, 76.6),
            (Sichel, 117.04766904592716),
            (Bootstrap, 59.524869445244413),
            (Ht, 66.047493198378475),
            (Mom1, 73.473925133668862),
            (Mom2, 72.794556124293639),
        ],
    },
    Fixture {
        name: "p09_near_full",
        f: &[(1, 5), (2, 3), (4, 2)],
        population: 20,
        sichel_g: Some(0.70797566440064279),
        expected: &[
            (Goodman, 10.245098039215686),
            (Gee, 10.12989176042577),
            (Eb, 10.12989176042577),
            (Chao, 14.166666666666667),
            (Shlosser, 10.255674202484139),
            (Jackknife, 14.736842105263158),
            (Sichel, 15.916083229672691),
            (Bootstrap, 12.174832209093239),
            (Ht, 10.0),
            (Mom1, 13.033670324270315),
            (Mom2, 10.0),
        ],
    },
    Fixture {
        name: "p10_wide",
        f: &[(1, 40), (2, 15), (3, 5), (7, 2)],
        population: 5000,
        sichel_g: Some(0.64447865884371853),
        expected: &[
            (Goodman, 1818211789599.6408),
            (Gee, 306.26762180748058),
            (Eb, 306.26762180748058),
            (Chao, 115.33333333333333),
            (Shlosser, 1322.9607899735039),
            (Jackknife, 101.5959595959596),
            (Sichel, 166.18685275767409),
            (Bootstrap, 78.868481170640973),
            (Ht, 87.214220762718582),
            (Mom1, 96.838612202538917),
            (Mom2, 94.916413797995259),
        ],
    },
    Fixture {
        name: "p11_skewed",
        f: &[(1, 60), (2, 12), (4, 1)],
        population: 200000,
        sichel_g: Some(0.95884759647756189),
        expected: &[
            (Goodman, -28539748394729.79),
            (Gee, 2873.3877677367769),
            (Eb, 2873.3877677367769),
            (Chao, 223.0),
            (Shlosser, 113153.19155981742),
            (Jackknife, 132.31818181818182),
            (Sichel, 252.66585726618613),
            (Bootstrap, 96.550406184924053),
            (Ht, 109.43712039510151),
            (Mom1, 227.88104999113081),
            (Mom2, 225.39215233870719),
        ],
    },
    Fixture {
        name: "p12_sparse",
        f: &[(1, 70), (2, 10), (5, 2)],
        population: 40000,
        sichel_g: None,
        expected: &[
            (Goodman, 22392317713904.677),
            (Gee, 1412.0),
            (Eb, 1412.0),
            (Chao, 327.0),
            (Shlosser, 23006.353119151509),
            (Jackknife, 151.3),
            (Sichel, 82.0),
            (Bootstrap, 108.96030050651427),
            (Ht, 123.87236164197505),
            (Mom1, 243.33514217132157),
            (Mom2, 239.97147550417203),
        ],
    },
    Fixture {
        name: "p13_half",
        f: &[(1, 30), (2, 10), (3, 4), (6, 1)],
        population: 140,
        sichel_g: Some(0.71860351338631774),
        expected: &[
            (Goodman, 68.236023962867685),
            (Gee, 58.045803238766358),
            (Eb, 58.045803238766358),
            (Chao, 90.0),
            (Shlosser, 71.354645657493527),
            (Jackknife, 74.558823529411765),
            (Sichel, 116.56094437022853),
            (Bootstrap, 57.455977572766978),
            (Ht, 55.851093067607276),
            (Mom1, 76.277117583746748),
            (Mom2, 54.972652548807209),
        ],
    },
];
