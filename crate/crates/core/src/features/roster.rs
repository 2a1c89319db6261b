//! The fixed submodel roster: 6 spam submodels and 33 minmax submodels.

use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::residuals::{Axis, Direction, Directional, KernelKind};

use super::symmetry::{MINMAX_ORBITS, SPAM_ORBITS};

/// Total feature dimension.
pub const FEATURE_DIM: usize = 12_753;

pub const SPAM_BLOCK: usize = 2 * SPAM_ORBITS;
pub const MINMAX_BLOCK: usize = MINMAX_ORBITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Residual {
    Directional(Directional),
    Kernel(KernelKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubmodelKind {
    /// Co-occurrences of each listed residual, summed, kept per scan direction.
    Spam,
    /// Co-occurrences of the pointwise min and max over the listed residuals,
    /// horizontal and vertical scans summed.
    MinMax,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmodelSpec {
    pub id: String,
    pub kind: SubmodelKind,
    pub residuals: Vec<Residual>,
    /// Quantization step, equal to the residual normalizer.
    pub q: i32,
    pub offset: usize,
}

impl SubmodelSpec {
    pub fn len(&self) -> usize {
        match self.kind {
            SubmodelKind::Spam => SPAM_BLOCK,
            SubmodelKind::MinMax => MINMAX_BLOCK,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

use Direction::*;

const DIRECTION_SETS: [&[Direction]; 11] = [
    &[E, W],
    &[N, S],
    &[NE, SW],
    &[NW, SE],
    &[E, W, N, S],
    &[NE, NW, SE, SW],
    &[E, W, NE, SW],
    &[E, W, NW, SE],
    &[N, S, NE, SW],
    &[N, S, NW, SE],
    &[E, W, N, S, NE, NW, SE, SW],
];

const AXIS_SETS: [&[Axis]; 11] = [
    &[Axis::H, Axis::V],
    &[Axis::H, Axis::D],
    &[Axis::H, Axis::M],
    &[Axis::V, Axis::D],
    &[Axis::V, Axis::M],
    &[Axis::D, Axis::M],
    &[Axis::H, Axis::V, Axis::D],
    &[Axis::H, Axis::V, Axis::M],
    &[Axis::H, Axis::D, Axis::M],
    &[Axis::V, Axis::D, Axis::M],
    &[Axis::H, Axis::V, Axis::D, Axis::M],
];

fn build() -> Vec<SubmodelSpec> {
    let mut specs = Vec::with_capacity(39);
    let mut offset = 0;
    let mut push = |id: String, kind, residuals: Vec<Residual>, q| {
        let spec = SubmodelSpec {
            id,
            kind,
            residuals,
            q,
            offset,
        };
        offset += spec.len();
        specs.push(spec);
    };

    let d = |x| Residual::Directional(x);
    let k = |x| Residual::Kernel(x);
    push(
        "spam1_E".into(),
        SubmodelKind::Spam,
        vec![d(Directional::First(E))],
        1,
    );
    push(
        "spam2_h".into(),
        SubmodelKind::Spam,
        vec![d(Directional::Second(Axis::H))],
        2,
    );
    push(
        "spam3_E".into(),
        SubmodelKind::Spam,
        vec![d(Directional::Third(E))],
        3,
    );
    push(
        "spam_square3".into(),
        SubmodelKind::Spam,
        vec![k(KernelKind::Square3)],
        4,
    );
    push(
        "spam_square5".into(),
        SubmodelKind::Spam,
        vec![k(KernelKind::Square5)],
        12,
    );
    push(
        "spam_edge3_NS".into(),
        SubmodelKind::Spam,
        vec![k(KernelKind::Edge3N), k(KernelKind::Edge3S)],
        4,
    );

    for (order, make) in [
        (1, Directional::First as fn(Direction) -> Directional),
        (3, Directional::Third as fn(Direction) -> Directional),
    ] {
        for set in DIRECTION_SETS {
            let names: Vec<&str> = set.iter().map(|x| x.name()).collect();
            push(
                format!("minmax{order}_{}", names.join("_")),
                SubmodelKind::MinMax,
                set.iter().map(|&x| d(make(x))).collect(),
                order,
            );
        }
        if order == 1 {
            for set in AXIS_SETS {
                let names: Vec<&str> = set.iter().map(|x| x.name()).collect();
                push(
                    format!("minmax2_{}", names.join("_")),
                    SubmodelKind::MinMax,
                    set.iter().map(|&x| d(Directional::Second(x))).collect(),
                    2,
                );
            }
        }
    }
    specs
}

/// The roster in serialization order.
pub fn roster() -> &'static [SubmodelSpec] {
    static ROSTER: OnceLock<Vec<SubmodelSpec>> = OnceLock::new();
    ROSTER.get_or_init(|| {
        let r = build();
        let dim: usize = r.iter().map(|s| s.len()).sum();
        assert_eq!(dim, FEATURE_DIM, "roster dimension");
        r
    })
}

/// One line per submodel: `id kind offset len q`.
pub fn roster_manifest() -> String {
    let mut text = String::new();
    for s in roster() {
        let kind = match s.kind {
            SubmodelKind::Spam => "spam",
            SubmodelKind::MinMax => "minmax",
        };
        text.push_str(&format!(
            "{} {} {} {} {}\n",
            s.id,
            kind,
            s.offset,
            s.len(),
            s.q
        ));
    }
    text
}

/// SHA-256 of the roster manifest, hex encoded.
pub fn roster_digest() -> String {
    hex::encode(Sha256::digest(roster_manifest().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residuals::ResidualKernel;

    fn residual_kernel(r: &Residual) -> ResidualKernel {
        match *r {
            Residual::Directional(d) => ResidualKernel::directional(d),
            Residual::Kernel(k) => ResidualKernel::fixed(k),
        }
    }

    #[test]
    fn counts_and_dimension() {
        let r = roster();
        assert_eq!(r.len(), 39);
        assert_eq!(r.iter().filter(|s| s.kind == SubmodelKind::Spam).count(), 6);
        assert_eq!(
            r.iter().filter(|s| s.kind == SubmodelKind::MinMax).count(),
            33
        );
        assert_eq!(6 * 338 + 33 * 325, FEATURE_DIM);
        let last = r.last().unwrap();
        assert_eq!(last.offset + last.len(), FEATURE_DIM);
        let ids: std::collections::HashSet<_> = r.iter().map(|s| &s.id).collect();
        assert_eq!(ids.len(), 39);
    }

    #[test]
    fn q_equals_residual_normalizer() {
        for s in roster() {
            for res in &s.residuals {
                assert_eq!(residual_kernel(res).order(), s.q, "{}", s.id);
            }
        }
    }

    #[test]
    fn direction_sets_closed_under_reversal() {
        for s in roster() {
            for res in &s.residuals {
                let mirrored = match *res {
                    Residual::Directional(Directional::First(d)) => {
                        Residual::Directional(Directional::First(d.reversed()))
                    }
                    Residual::Directional(Directional::Third(d)) => {
                        Residual::Directional(Directional::Third(d.reversed()))
                    }
                    Residual::Kernel(KernelKind::Edge3N) => Residual::Kernel(KernelKind::Edge3S),
                    Residual::Kernel(KernelKind::Edge3S) => Residual::Kernel(KernelKind::Edge3N),
                    other => other,
                };
                // Spam submodels absorb reversal through sign symmetry for
                // single directional residuals.
                if s.kind == SubmodelKind::MinMax || matches!(res, Residual::Kernel(_)) {
                    assert!(
                        s.residuals.contains(&mirrored),
                        "{} lacks {mirrored:?}",
                        s.id
                    );
                }
            }
        }
    }

    #[test]
    fn minmax_sets_are_distinct_per_order() {
        for order in ["minmax1_", "minmax2_", "minmax3_"] {
            let sets: Vec<_> = roster()
                .iter()
                .filter(|s| s.id.starts_with(order))
                .collect();
            assert_eq!(sets.len(), 11);
        }
    }

    #[test]
    fn digest_is_stable_hex() {
        let d = roster_digest();
        assert_eq!(d.len(), 64);
        assert_eq!(d, roster_digest());
        assert!(roster_manifest().starts_with("spam1_E spam 0 338 1\n"));
    }
}
