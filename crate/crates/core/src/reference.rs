//! Published optimal-witness ranges, kept for side-by-side comparison.

use crate::ghzcert::{LayoutKind, SeparabilityClass};

/// One published range: witness size m, layout column, and inclusive n range.
/// `n_end == None` marks an open-ended last row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefRow {
    pub m: usize,
    pub kind: LayoutKind,
    pub n_start: u64,
    pub n_end: Option<u64>,
}

const fn b(m: usize, s: u64, e: u64) -> RefRow {
    RefRow { m, kind: LayoutKind::Balanced, n_start: s, n_end: Some(e) }
}

const fn s(m: usize, st: u64, e: u64) -> RefRow {
    RefRow { m, kind: LayoutKind::Singletons, n_start: st, n_end: Some(e) }
}

pub const BISEPARABLE: &[RefRow] = &[
    s(1, 3, 9),
    s(3, 10, 16),
    b(4, 17, 18),
    s(4, 19, 32),
    b(5, 33, 37),
    s(5, 38, 63),
    b(6, 64, 73),
    s(6, 74, 124),
    b(7, 125, 142),
    s(7, 143, 244),
    b(8, 245, 275),
    s(8, 276, 482),
    b(9, 483, 538),
    s(9, 539, 957),
    b(10, 958, 1058),
    s(10, 1059, 1906),
    b(11, 1907, 2091),
    s(11, 2092, 3809),
    b(12, 3810, 4149),
    s(12, 4150, 7627),
    b(13, 7628, 8256),
    s(13, 8257, 15291),
    b(14, 15292, 16460),
    s(14, 16461, 30674),
    b(15, 30675, 32857),
    s(15, 32858, 61544),
    b(16, 51545, 65639),
    s(16, 65640, 123481),
    b(17, 123482, 131190),
    s(17, 131191, 247715),
    b(18, 247716, 262278),
    s(18, 262279, 496848),
    b(19, 496849, 524439),
    s(19, 524440, 996318),
    b(20, 996319, 1048745),
    s(20, 1048746, 1997477),
    b(21, 1997478, 2097340),
    s(21, 2097341, 4003864),
    b(22, 4003865, 4194512),
    s(22, 4194513, 8024117),
    b(23, 8024118, 8388838),
    s(23, 8388839, 16078419),
    b(24, 16078420, 16777468),
    s(24, 16777469, 32212527),
    b(25, 32212528, 33554707),
    s(25, 33554708, 64528051),
    b(26, 64528052, 67109163),
    s(26, 67109164, 129247012),
    RefRow { m: 27, kind: LayoutKind::Balanced, n_start: 129247013, n_end: None },
];

pub const TRISEPARABLE: &[RefRow] = &[
    s(1, 4, 10),
    s(3, 11, 11),
    b(4, 12, 15),
    s(4, 16, 24),
    b(5, 25, 33),
    s(5, 34, 50),
    b(6, 51, 68),
    s(6, 69, 102),
    b(7, 103, 136),
    s(7, 137, 207),
    b(8, 208, 269),
    s(8, 270, 419),
    b(9, 420, 531),
    s(9, 532, 847),
    b(10, 848, 1029),
];

pub const QUADRISEPARABLE: &[RefRow] = &[
    s(1, 5, 10),
    s(4, 11, 17),
    b(5, 18, 28),
    s(5, 29, 38),
    b(6, 39, 63),
    s(6, 64, 81),
    b(7, 82, 130),
    s(7, 131, 171),
    b(8, 172, 262),
    s(8, 263, 357),
    b(9, 358, 523),
    s(9, 524, 739),
    b(10, 740, 1029),
];

/// Smallest n at which the (n - i)-producibility witness first needs m != 1,
/// for i = 1, 2, ...
pub const PRODUCIBILITY_ONSETS: &[u64] =
    &[9, 15, 22, 28, 34, 41, 47, 54, 60, 66, 73, 79, 86, 92, 98, 105];

pub fn rows_for(class: SeparabilityClass) -> Option<&'static [RefRow]> {
    match class {
        SeparabilityClass::KSeparable(2) => Some(BISEPARABLE),
        SeparabilityClass::KSeparable(3) => Some(TRISEPARABLE),
        SeparabilityClass::KSeparable(4) => Some(QUADRISEPARABLE),
        _ => None,
    }
}

/// Published row containing n, if any.
pub fn lookup(class: SeparabilityClass, n: u64) -> Option<RefRow> {
    rows_for(class)?
        .iter()
        .copied()
        .find(|r| n >= r.n_start && r.n_end.is_none_or(|e| n <= e))
}
