// Generator orbits of the octahedrally symmetric Lebedev rules.
// Weights are normalized to sum to one.

use super::lebedev::{Orbit, Rule};

pub(super) const RULE_6: Rule = Rule {
    points: 6,
    degree: 3,
    orbits: &[
        (Orbit::A1, 0.16666666666666666),
    ],
};

pub(super) const RULE_14: Rule = Rule {
    points: 14,
    degree: 5,
    orbits: &[
        (Orbit::A1, 0.0666666666666667),
        (Orbit::A3, 0.07500000000000001),
    ],
};

pub(super) const RULE_26: Rule = Rule {
    points: 26,
    degree: 7,
    orbits: &[
        (Orbit::A1, 0.04761904761904761),
        (Orbit::A2, 0.0380952380952381),
        (Orbit::A3, 0.03214285714285713),
    ],
};

pub(super) const RULE_38: Rule = Rule {
    points: 38,
    degree: 9,
    orbits: &[
        (Orbit::A1, 0.00952380952380952),
        (Orbit::A3, 0.03214285714285715),
        (Orbit::C(0.4597008433809831), 0.02857142857142858),
    ],
};

pub(super) const RULE_50: Rule = Rule {
    points: 50,
    degree: 11,
    orbits: &[
        (Orbit::A1, 0.0126984126984127),
        (Orbit::A2, 0.022574955908289243),
        (Orbit::A3, 0.021093749999999994),
        (Orbit::B(0.30151134457776363), 0.020173335537918873),
    ],
};

pub(super) const RULE_74: Rule = Rule {
    points: 74,
    degree: 13,
    orbits: &[
        (Orbit::A1, 0.0005130671797338309),
        (Orbit::A2, 0.016604069565742043),
        (Orbit::A3, -0.02958603896103894),
        (Orbit::B(0.48038446141526137), 0.026576207082159457),
        (Orbit::C(0.3207726489807764), 0.016522170993715713),
    ],
};

pub(super) const RULE_86: Rule = Rule {
    points: 86,
    degree: 15,
    orbits: &[
        (Orbit::A1, 0.011544011544011542),
        (Orbit::A3, 0.011943909085856281),
        (Orbit::B(0.36960284645415026), 0.011110555710603404),
        (Orbit::B(0.6943540066026663), 0.011876501294537144),
        (Orbit::C(0.3742430390903412), 0.011812303746904477),
    ],
};

pub(super) const RULE_110: Rule = Rule {
    points: 110,
    degree: 17,
    orbits: &[
        (Orbit::A1, 0.003828270494937157),
        (Orbit::A3, 0.00979373751248751),
        (Orbit::B(0.18511563534473618), 0.008211737283191111),
        (Orbit::B(0.6904210483822921), 0.009942814891178105),
        (Orbit::B(0.39568947305594193), 0.009595471336070962),
        (Orbit::C(0.47836902881215027), 0.009694996361663029),
    ],
};

pub(super) const RULES: &[Rule] = &[RULE_6, RULE_14, RULE_26, RULE_38, RULE_50, RULE_74, RULE_86, RULE_110];
