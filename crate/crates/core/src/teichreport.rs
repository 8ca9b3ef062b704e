//! Per-component Teichmüller-dimension verdicts and their combination.
//!
//! Each wandering-domain component contributes by kind and grand-orbit
//! relation: a discrete relation leaves an infinite-dimensional deformation
//! space, an indiscrete relation pins the component down to its conformal
//! modulus (one dimension for a finite-modulus annulus, zero for a punctured
//! disc). Heuristic relation verdicts propagate as `Unknown` — the verdicts
//! here encode theorems, not evidence.

use crate::orbitrel::RelationVerdict;
use crate::{check_positive, Error, Result};

/// Conformal type of one wandering component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComponentKind {
    FiniteModulusAnnulus(f64),
    PuncturedDisc,
    SimplyConnectedPiece,
    Other,
}

impl ComponentKind {
    fn doubly_connected(&self) -> bool {
        matches!(
            self,
            ComponentKind::FiniteModulusAnnulus(_) | ComponentKind::PuncturedDisc
        )
    }
}

/// One component together with its grand-orbit relation verdict and the
/// scenario it came from.
#[derive(Clone, Debug)]
pub struct ComponentReport {
    kind: ComponentKind,
    relation: RelationVerdict,
    source: String,
}

impl ComponentReport {
    /// An indiscrete relation forces the component to be doubly connected,
    /// so such reports must carry an annulus or punctured-disc kind.
    pub fn new(kind: ComponentKind, relation: RelationVerdict, source: &str) -> Result<Self> {
        if let ComponentKind::FiniteModulusAnnulus(mu) = kind {
            check_positive("annulus modulus", mu)?;
        }
        if relation == RelationVerdict::Indiscrete && !kind.doubly_connected() {
            return Err(Error::InvalidComponent(format!(
                "indiscrete relation on a {kind:?} component; only annuli and punctured discs support one"
            )));
        }
        Ok(Self {
            kind,
            relation,
            source: source.to_string(),
        })
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    pub fn relation(&self) -> RelationVerdict {
        self.relation
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Dimension contributed by a single component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentDimension {
    Infinite,
    One,
    Zero,
    Unknown,
}

impl std::fmt::Display for ComponentDimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ComponentDimension::Infinite => "infinite",
            ComponentDimension::One => "1",
            ComponentDimension::Zero => "0",
            ComponentDimension::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// Total dimension, ordered `Finite(m) < Finite(m+1) < Unknown < Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DimensionValue {
    Finite(usize),
    Unknown,
    Infinite,
}

impl std::fmt::Display for DimensionValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DimensionValue::Finite(m) => write!(f, "{m}"),
            DimensionValue::Unknown => f.write_str("unknown"),
            DimensionValue::Infinite => f.write_str("infinite"),
        }
    }
}

/// Combined verdict with the per-component contributions it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionVerdict {
    pub value: DimensionValue,
    pub breakdown: Vec<ComponentDimension>,
}

/// Dimension of the deformation space of one component: a discrete relation
/// leaves it infinite-dimensional whatever the kind; an indiscrete relation
/// reduces it to the modulus of the component (one for a finite-modulus
/// annulus, zero for a punctured disc); heuristic verdicts stay unknown.
pub fn component_dimension(c: &ComponentReport) -> ComponentDimension {
    match (c.relation(), c.kind()) {
        (RelationVerdict::Discrete, _) => ComponentDimension::Infinite,
        (RelationVerdict::Indiscrete, ComponentKind::FiniteModulusAnnulus(_)) => {
            ComponentDimension::One
        }
        (RelationVerdict::Indiscrete, ComponentKind::PuncturedDisc) => ComponentDimension::Zero,
        (RelationVerdict::Indiscrete, _) => {
            unreachable!("constructor rejects indiscrete non-doubly-connected components")
        }
        (RelationVerdict::Undetermined, _) => ComponentDimension::Unknown,
    }
}

/// Combine component contributions: infinite dominates, then unknown, and an
/// all-finite list sums to the number of annulus contributions. Passing
/// `list_is_infinite = true` records that the finite list stands in for an
/// infinite family, which forces an infinite total.
pub fn total_dimension(components: &[ComponentReport], list_is_infinite: bool) -> DimensionVerdict {
    let breakdown: Vec<ComponentDimension> = components.iter().map(component_dimension).collect();
    let value = if list_is_infinite || breakdown.contains(&ComponentDimension::Infinite) {
        DimensionValue::Infinite
    } else if breakdown.contains(&ComponentDimension::Unknown) {
        DimensionValue::Unknown
    } else {
        DimensionValue::Finite(
            breakdown
                .iter()
                .filter(|d| **d == ComponentDimension::One)
                .count(),
        )
    };
    DimensionVerdict { value, breakdown }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn annulus_indiscrete() -> ComponentReport {
        ComponentReport::new(
            ComponentKind::FiniteModulusAnnulus(0.7),
            RelationVerdict::Indiscrete,
            "test",
        )
        .unwrap()
    }

    fn punctured_indiscrete() -> ComponentReport {
        ComponentReport::new(
            ComponentKind::PuncturedDisc,
            RelationVerdict::Indiscrete,
            "test",
        )
        .unwrap()
    }

    fn discrete_piece() -> ComponentReport {
        ComponentReport::new(
            ComponentKind::SimplyConnectedPiece,
            RelationVerdict::Discrete,
            "test",
        )
        .unwrap()
    }

    #[test]
    fn discrete_components_are_infinite_dimensional() {
        assert_eq!(
            component_dimension(&discrete_piece()),
            ComponentDimension::Infinite
        );
        let annulus_discrete = ComponentReport::new(
            ComponentKind::FiniteModulusAnnulus(0.3),
            RelationVerdict::Discrete,
            "test",
        )
        .unwrap();
        assert_eq!(
            component_dimension(&annulus_discrete),
            ComponentDimension::Infinite
        );
    }

    #[test]
    fn indiscrete_annuli_keep_one_modulus() {
        assert_eq!(
            component_dimension(&annulus_indiscrete()),
            ComponentDimension::One
        );
    }

    #[test]
    fn indiscrete_punctured_discs_are_rigid() {
        assert_eq!(
            component_dimension(&punctured_indiscrete()),
            ComponentDimension::Zero
        );
    }

    #[test]
    fn undetermined_relations_stay_unknown() {
        let c = ComponentReport::new(
            ComponentKind::Other,
            RelationVerdict::Undetermined,
            "test",
        )
        .unwrap();
        assert_eq!(component_dimension(&c), ComponentDimension::Unknown);
    }

    #[test]
    fn indiscrete_relations_require_doubly_connected_kinds() {
        for kind in [ComponentKind::SimplyConnectedPiece, ComponentKind::Other] {
            assert!(matches!(
                ComponentReport::new(kind, RelationVerdict::Indiscrete, "test"),
                Err(Error::InvalidComponent(_))
            ));
        }
        assert!(
            ComponentReport::new(ComponentKind::FiniteModulusAnnulus(-1.0), RelationVerdict::Discrete, "test")
                .is_err()
        );
    }

    #[test]
    fn one_annulus_two_cusps_totals_one() {
        let verdict = total_dimension(
            &[
                annulus_indiscrete(),
                punctured_indiscrete(),
                punctured_indiscrete(),
            ],
            false,
        );
        assert_eq!(verdict.value, DimensionValue::Finite(1));
        assert_eq!(
            verdict.breakdown,
            vec![
                ComponentDimension::One,
                ComponentDimension::Zero,
                ComponentDimension::Zero,
            ]
        );
    }

    #[test]
    fn empty_lists_total_zero() {
        assert_eq!(total_dimension(&[], false).value, DimensionValue::Finite(0));
    }

    #[test]
    fn any_discrete_component_dominates() {
        let verdict = total_dimension(&[discrete_piece(), annulus_indiscrete()], false);
        assert_eq!(verdict.value, DimensionValue::Infinite);
    }

    #[test]
    fn infinite_families_force_an_infinite_total() {
        let verdict = total_dimension(&[punctured_indiscrete()], true);
        assert_eq!(verdict.value, DimensionValue::Infinite);
    }

    #[test]
    fn unknown_dominates_finite_but_not_infinite() {
        let unknown = ComponentReport::new(
            ComponentKind::Other,
            RelationVerdict::Undetermined,
            "test",
        )
        .unwrap();
        assert_eq!(
            total_dimension(&[annulus_indiscrete(), unknown.clone()], false).value,
            DimensionValue::Unknown
        );
        assert_eq!(
            total_dimension(&[discrete_piece(), unknown], false).value,
            DimensionValue::Infinite
        );
    }

    #[test]
    fn dimension_values_order_as_documented() {
        assert!(DimensionValue::Finite(0) < DimensionValue::Finite(1));
        assert!(DimensionValue::Finite(1_000_000) < DimensionValue::Unknown);
        assert!(DimensionValue::Unknown < DimensionValue::Infinite);
    }

    fn arbitrary_component() -> impl Strategy<Value = ComponentReport> {
        prop_oneof![
            Just(annulus_indiscrete()),
            Just(punctured_indiscrete()),
            Just(discrete_piece()),
            Just(
                ComponentReport::new(
                    ComponentKind::Other,
                    RelationVerdict::Undetermined,
                    "test"
                )
                .unwrap()
            ),
        ]
    }

    proptest! {
        /// Adding a component never lowers the total.
        #[test]
        fn totals_are_monotone(
            base in proptest::collection::vec(arbitrary_component(), 0..6),
            extra in arbitrary_component(),
        ) {
            let before = total_dimension(&base, false).value;
            let mut extended = base;
            extended.push(extra);
            let after = total_dimension(&extended, false).value;
            prop_assert!(after >= before);
        }
    }
}
