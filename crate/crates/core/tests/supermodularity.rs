mod common;

use common::{increasing_differences, random_instance};

#[test]
fn marginal_gains_have_increasing_differences() {
    let mut strict = 0;
    for seed in 0..12 {
        let inst = random_instance(900 + seed, (2, 4), (1, 3), 3);
        if inst.m() * inst.n() > 12 {
            continue;
        }
        let (checked, bad, s) = increasing_differences(&inst);
        assert!(checked > 0);
        assert_eq!(bad, 0, "seed {seed}");
        strict += s;
    }
    assert!(strict > 0);
}
