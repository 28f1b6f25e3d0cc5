//! Registry of verification checks.
//!
//! Every check id has exactly one anchor: a stable label for the identity it
//! tests, or `plumbing` for load-time validation. The README index is
//! generated from this table (`acgeom checks`).

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Load,
    AlmostComplex,
    Hermitian,
    Conformal,
    Projective,
    Fixtures,
}

impl Suite {
    pub const SELECTABLE: [&'static str; 6] = ["all", "almost-complex", "hermitian", "conformal", "projective", "fixtures"];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Load => "load",
            Suite::AlmostComplex => "almost-complex",
            Suite::Hermitian => "hermitian",
            Suite::Conformal => "conformal",
            Suite::Projective => "projective",
            Suite::Fixtures => "fixtures",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Suite::Load => "Scene validation",
            Suite::AlmostComplex => "Almost complex connections",
            Suite::Hermitian => "Almost Hermitian geometry",
            Suite::Conformal => "Conformal almost Hermitian geometry",
            Suite::Projective => "Projective almost complex geometry",
            Suite::Fixtures => "Worked fixtures",
        }
    }

    /// Suites selected by a command-line name; load checks ride along.
    pub fn select(name: &str) -> Option<Vec<Suite>> {
        use Suite::*;
        Some(match name {
            "all" => vec![Load, AlmostComplex, Hermitian, Conformal, Projective, Fixtures],
            "almost-complex" => vec![Load, AlmostComplex],
            "hermitian" => vec![Load, Hermitian],
            "conformal" => vec![Load, Conformal],
            "projective" => vec![Load, Projective],
            "fixtures" => vec![Load, Fixtures],
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckDef {
    pub id: &'static str,
    pub suite: Suite,
    pub anchor: &'static str,
    pub statement: &'static str,
    /// Uses the seeded generator.
    pub randomised: bool,
}

const fn def(id: &'static str, suite: Suite, anchor: &'static str, statement: &'static str, randomised: bool) -> CheckDef {
    CheckDef { id, suite, anchor, statement, randomised }
}

use Suite::*;

pub const CHECKS: &[CheckDef] = &[
    def("load.j-squared", Load, "plumbing", "J² + 1 = 0 at every sample", false),
    def("load.jacobi", Load, "plumbing", "structure constants satisfy the Jacobi identity", false),
    def("load.metric-hermitian", Load, "plumbing", "g(JX,JY) = g(X,Y) for the metric block", false),
    // almost complex connections
    def("ac.ricci-identity", AlmostComplex, "curvature-torsion-commutator", "∇²_{a,b}Y − ∇²_{b,a}Y = R(e_a,e_b)Y − ∇_{T(e_a,e_b)}Y for random ∇ and Y", true),
    def("ac.g-preserves-j", AlmostComplex, "complexified-connection", "∇^G J = 0 for ∇^G = ∇ + G and random ∇", true),
    def("ac.g-first-traces", AlmostComplex, "g-tensor-first-traces", "the first-slot traces of G and JG vanish", true),
    def("ac.g-antilinear", AlmostComplex, "g-tensor-antilinearity", "G(JX,Y) = −JG(X,Y)", true),
    def("ac.g-parts-linearity", AlmostComplex, "g-tensor-hermitian-parts", "G₊(X,JY) = JG₊(X,Y) and G₋(X,JY) = −JG₋(X,Y)", true),
    def("ac.jg-derivative", AlmostComplex, "jg-equals-derivative", "2J^a_b G^b_{cd} = ∇_d J^a_c", true),
    def("ac.family-preserves-j", AlmostComplex, "complexified-family", "∇^G + tG₊ preserves J for t ∈ {−2, −1, −1/2, 1/2, 1, 3}", true),
    def("ac.general-almost-complex", AlmostComplex, "almost-complex-general-form", "∇^G + K preserves J when K is complex linear in its first argument", true),
    def("ac.nijenhuis-agreement", AlmostComplex, "nijenhuis-two-forms", "for torsion-free ∇ the ∇J expression of 4N, G₋(Y,X) − G₋(X,Y), and the bracket form of 4N agree", true),
    def("ac.torsion-anti-hermitian", AlmostComplex, "complexified-torsion", "for torsion-free ∇ the anti-Hermitian part of Tor ∇^G equals N", true),
    def("ac.kn-torsion", AlmostComplex, "kn-connection-torsion", "for random torsion-free ∇, Tor ∇^KN is anti-Hermitian and equals N", true),
    def("ac.compatibility-equivalence", AlmostComplex, "compatibility-traces", "∇_a J^a_b = 0 iff the second traces of G, JG, G(·,J·), G(J·,J·) vanish", true),
    def("ac.volume-trace", AlmostComplex, "volume-preservation", "∇ and ∇^G have the same trace Γ^c_{ca}", true),
    def("ac.integrable-kn", AlmostComplex, "integrable-kn-torsion-free", "if the bracket Nijenhuis tensor vanishes then ∇^KN of a torsion-free ∇ is torsion-free", true),
    // almost Hermitian
    def("h.levi-civita", Hermitian, "levi-civita-defining", "the Levi-Civita connection is torsion-free and metric", false),
    def("h.nabla-omega", Hermitian, "nabla-omega-from-g", "∇_Xω(Y,Z) = 2g(Y, JG(Z,X)), antisymmetric in Y and Z", false),
    def("h.lowered-g", Hermitian, "lowered-g-identities", "G(X,Y,Z) = g(X,G(Y,Z)) is skew in X,Y, satisfies G(X,JY,Z) + G(Y,JX,Z) = 0 and G(JX,JY,Z) = −G(X,Y,Z); likewise G₊ and G₋", false),
    def("h.flag-implications", Hermitian, "almost-hermitian-classes", "Kähler implies Hermitian, nearly Kähler, almost Kähler and semi-Kähler; nearly Kähler and almost Kähler together imply Kähler; in dimension 4 nearly Kähler implies Kähler", false),
    def("h.hermitian-integrable", Hermitian, "hermitian-iff-integrable", "G₋ of the Levi-Civita connection vanishes iff the bracket Nijenhuis tensor does", false),
    def("h.kahler-form", Hermitian, "kahler-form", "ω is skew and J-invariant with ω^{ab}ω_{ab} = n", false),
    def("h.metric-torsion", Hermitian, "metric-connection-with-torsion", "∇^LC + G_T is metric with torsion T for random T", true),
    def("h.characteristic-certificate", Hermitian, "characteristic-connection", "∇^G of Levi-Civita is metric, preserves J and its torsion difference tensor has no complex-linear part", false),
    def("h.characteristic-uniqueness", Hermitian, "characteristic-uniqueness", "adding a nonzero unitary perturbation to ∇^G breaks the certificate", true),
    def("h.nearly-kahler-torsion", Hermitian, "nearly-kahler-torsion", "nearly Kähler: G₊ = 0 and Tor ∇^G = −2G₋ = N is totally skew", false),
    // conformal
    def("c.weyl-defining", Conformal, "canonical-weyl-connection", "∇^c is torsion-free, ∇^c g = 2B⊗g and ∇^c_a J^a_b = 0", false),
    def("c.weyl-uniqueness", Conformal, "canonical-weyl-uniqueness", "no other Weyl connection of the class is compatible with J", true),
    def("c.weyl-traces", Conformal, "weyl-compatibility-traces", "a Weyl connection is compatible iff the metric traces of G, JG, G(·,J·), G(J·,J·) vanish", true),
    def("c.lee-covariance", Conformal, "lee-form-covariance", "under g ↦ e^{2φ}g: B ↦ B + dφ while ∇^c, G^c, ∇^gc, A_T and V(T) are unchanged", true),
    def("c.gc-connection", Conformal, "conformal-almost-complex-connection", "∇^gc = ∇^c + G^c preserves J and satisfies ∇^gc g = 2B⊗g", false),
    def("c.lowered-gc", Conformal, "lowered-gc-identities", "the lowered G^c, G^c₊, G^c₋ satisfy the lowered-G identities", false),
    def("c.family-almost-complex", Conformal, "conformal-family", "∇^gc + tG^c₊ preserves J for every t", false),
    def("c.family-conformal-only-at-zero", Conformal, "conformal-family-metricity", "∇^gc + tG^c₊ preserves the conformal class only at t = 0 when G^c₊ ≠ 0 (t ∈ {±1, ±2})", false),
    def("c.torsion-round-trip", Conformal, "weyl-connection-with-torsion", "for random T the constructed connection has torsion T, is compatible with J and satisfies ∇g = 2B′g", true),
    def("c.torsion-of-gc", Conformal, "weyl-torsion-uniqueness", "the connection built from Tor ∇^gc is ∇^gc", false),
    def("c.v-invariant", Conformal, "v-invariant", "V(Tor ∇^gc) = 0", false),
    def("c.faraday-closed", Conformal, "faraday-closed", "dF = 0 for F = dB", false),
    def("c.two-form-ranks", Conformal, "two-form-types", "in dimension 4 the type projectors on Λ² have ranks (1, 2, 3, 0)", false),
    def("c.lee-equation", Conformal, "lee-equation", "dω = 2B∧ω in dimension 4; for n ≥ 6 it holds iff Alt g(·,JG^c) = 0", false),
    def("c.flag-implications", Conformal, "conformal-classes", "G^c = 0 implies every weaker row; G^c(X,X) = 0 implies G^c₊ = 0; G^c(X,X) = 0 and G^c₋ = 0 imply G^c = 0", false),
    def("c.nkw-structure", Conformal, "nearly-kahler-weyl", "nearly Kähler Weyl: G^c₊ = 0, Tor ∇^gc = −2G^c₋ and ∇^gc shares the geodesics of ∇^c", false),
    def("c.hermitian-torsion", Conformal, "conformal-hermitian-torsion", "G^c₋ = 0 implies Tor ∇^gc is Hermitian", false),
    // projective
    def("p.a-covariance", Projective, "a-form-covariance", "A ↦ A + Υ under the projective change by Υ", true),
    def("p.composition", Projective, "projective-change-composition", "projective changes by Υ₁ then Υ₂ equal the change by Υ₁ + Υ₂", true),
    def("p.representative-independence", Projective, "p-connection-invariance", "∇^p, G^p and ∇^JP do not depend on the representative", true),
    def("p.p-connection", Projective, "p-connection", "∇^p is torsion-free, compatible with J and has A = 0", false),
    def("p.compatibility-forms", Projective, "projective-compatibility", "G^p₋^symm = 0 iff Sym[(∇_XJ)Y − (∇_{JX}J)JY] = 0", false),
    def("p.parts", Projective, "g-tensor-four-parts", "G^p is the sum of its four parts and G^p₊^symm = 0 iff G^p₊^skew = 0", false),
    def("p.jp-geodesics", Projective, "jp-geodesics", "∇^JP has the geodesics of p iff the class is compatible", false),
    def("p.jp-torsion", Projective, "jp-torsion-derived", "Tor ∇^JP = −4G^p₊^skew − 2G^p₋^skew", false),
    def("p.jp-torsion-half", Projective, "jp-torsion-half-skew", "compatible class: Tor ∇^JP = −½G^p^skew", false),
    def("p.family-dichotomy", Projective, "projective-family-dichotomy", "∇^p + t-family member shares the geodesics of p at t = −1 iff compatible, at t ≠ −1 iff G^p(X,X) = 0", false),
    def("p.reconstruction", Projective, "complex-connections-in-class", "compatible class: ∇^JP + ½T with T complex bilinear and skew is recovered from itself", true),
    def("p.faraday-routes", Projective, "projective-faraday", "−R_{ab}{}^c{}_c/(n+1) of ∇^p equals dA of a scale, and it is closed", false),
    def("p.classification", Projective, "projective-classes", "G^p = 0 implies all rows; G^p(X,X) = 0 iff compatible and G^p₊ = 0; in dimension 2 compatible iff G^p = 0", false),
    // worked fixtures
    def("fx.maxwell-lee-form", Fixtures, "maxwell-family-lee-form", "B of the four-dimensional family matches its closed form", false),
    def("fx.maxwell-faraday", Fixtures, "maxwell-family-faraday", "F = dB matches its closed form on the pairs (1,2) and (3,4)", false),
    def("fx.maxwell-hodge", Fixtures, "maxwell-family-hodge", "⋆F matches its closed form", false),
    def("fx.maxwell-dstar", Fixtures, "maxwell-family-dstar", "d⋆F matches its closed form", false),
    def("fx.maxwell-current", Fixtures, "maxwell-subfamily", "δF = 0 on the sub-family b₁ = a₂, b₂ = s a₂, c₂ = s c₁", false),
    def("fx.maxwell-lcak", Fixtures, "maxwell-family-lcak", "the family is not LCAK when a₁c₂ ≠ a₂c₁", false),
    def("fx.surface-p-connection", Fixtures, "surface-p-connection", "∇^p of the surface family matches its closed form (scene and 16 random parameter points)", true),
    def("fx.surface-a-form", Fixtures, "surface-a-form", "A of the surface family matches its closed form", false),
    def("fx.surface-relations", Fixtures, "surface-compatibility-relations", "G^p₋(X,X) = 0 forces c = a + β − 2p and f = −α − 2b + q", false),
    def("fx.surface-compatible", Fixtures, "surface-compatible-class", "on the compatible surface family G^p = 0, ∇^p matches its closed form and ∇^p g = 2B⊗g with the closed-form B", false),
    def("fx.family-classification", Fixtures, "fixture-classes", "named fixtures land in their expected classes", false),
];

pub fn lookup(id: &str) -> Option<&'static CheckDef> {
    CHECKS.iter().find(|c| c.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn ids_are_unique_and_sorted_within_suites() {
        let ids: BTreeSet<_> = CHECKS.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), CHECKS.len());
        for c in CHECKS {
            assert!(!c.anchor.is_empty());
            assert_eq!(c.anchor == "plumbing", c.suite == Suite::Load, "{}", c.id);
        }
    }

    #[test]
    fn anchors_are_unique() {
        let anchors: BTreeSet<_> = CHECKS.iter().filter(|c| c.anchor != "plumbing").map(|c| c.anchor).collect();
        assert_eq!(anchors.len(), CHECKS.iter().filter(|c| c.anchor != "plumbing").count());
    }
}
