use num_bigint::BigInt;
use powdiff::curvedb::Parity;
use powdiff::quadfield::{class_group, QuadField};
use powdiff::tm::{descent_c, reverse_engineer, yeven_system};

/// (C1, q, x, y, alpha, p) with y even and p in {5, 7}.
const YEVEN_SMALL_P: [(u64, u64, u64, u64, u64, u64); 16] = [
    (1, 7, 5, 2, 1, 5),
    (1, 7, 181, 8, 1, 5),
    (1, 7, 11, 2, 1, 7),
    (1, 23, 3, 2, 1, 5),
    (3, 5, 3, 2, 1, 5),
    (3, 5, 1, 2, 3, 7),
    (5, 3, 1, 2, 3, 5),
    (5, 3, 5, 2, 1, 7),
    (7, 5, 1, 2, 2, 5),
    (7, 11, 1, 2, 2, 7),
    (13, 11, 3, 2, 1, 7),
    (13, 19, 1, 2, 1, 5),
    (15, 7, 33, 4, 2, 7),
    (15, 17, 1, 2, 1, 5),
    (15, 17, 7, 4, 2, 5),
    (19, 13, 1, 2, 1, 5),
];

#[test]
fn fixtures_are_solutions() {
    for (c1, q, x, y, alpha, p) in YEVEN_SMALL_P {
        let lhs = BigInt::from(c1) * x * x + BigInt::from(q).pow(alpha as u32);
        assert_eq!(lhs, BigInt::from(y).pow(p as u32), "({c1},{q},{x},{y},{alpha},{p})");
    }
}

#[test]
fn every_known_solution_solves_its_system() {
    for (c1, q, x, y, alpha, p) in YEVEN_SMALL_P {
        let tm = yeven_system(c1, q, Parity::of(alpha), p).unwrap();
        let (xb, yb) = (BigInt::from(x), BigInt::from(y));
        let re = reverse_engineer(&tm, &xb, &yb, alpha)
            .unwrap()
            .unwrap_or_else(|| panic!("no beta for ({c1},{q},{x},{y},{alpha},{p})"));
        let k = alpha / 2;
        assert_eq!(tm.f.eval(&re.u, &re.v), &tm.a * BigInt::from(q).pow(k as u32));
        assert_eq!(tm.g.eval(&re.u, &re.v), &tm.b * &re.x_signed);
        let rec = tm.recover(&re.u, &re.v).unwrap();
        assert_eq!((rec.alpha, rec.y), (alpha, yb));
        assert_eq!(rec.x, re.x_signed);
    }
}

#[test]
fn system_count() {
    // one system per admissible pair, parity and p in {5, 7}, unless p | h
    let odd = [(1, 7), (1, 23), (3, 5), (3, 13), (5, 3), (5, 11), (5, 19), (7, 17), (11, 5), (11, 13), (13, 3), (13, 11), (13, 19), (15, 17), (17, 7), (17, 23), (19, 5), (19, 13)];
    let even = [(7, 3), (7, 5), (7, 11), (7, 13), (7, 17), (7, 19), (7, 23), (15, 7), (15, 11), (15, 13), (15, 17), (15, 19), (15, 23)];
    let mut built = 0;
    let mut refused = Vec::new();
    for (pairs, parity) in [(&odd[..], Parity::Odd), (&even[..], Parity::Even)] {
        for &(c1, q) in pairs {
            for p in [5, 7] {
                match yeven_system(c1, q, parity, p) {
                    Ok(tm) => {
                        assert_eq!(tm.f.degree(), p as u32);
                        built += 1;
                    }
                    Err(_) => {
                        let h = class_group(QuadField::new(descent_c(c1, q, parity)).unwrap()).h;
                        assert_eq!(h % p, 0, "({c1},{q}) p={p} refused with p not dividing h = {h}");
                        refused.push((c1, q, p));
                    }
                }
            }
        }
    }
    assert_eq!(built + refused.len(), 62);
    assert_eq!(refused, vec![(7, 17, 5), (11, 13, 5), (13, 11, 5), (17, 7, 5), (17, 23, 7)]);
    println!("built {built}, refused {refused:?}");
}
