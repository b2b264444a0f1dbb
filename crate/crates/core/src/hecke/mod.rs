//! Finite Hecke algebra computations for the three pinned strata: the
//! splitting `A = B + B^perp`, the group `J` and character `Psi`, coset
//! enumeration and convolution.

mod algebra;
mod checks;
mod eta;
mod families;
mod group;
mod indices;
mod relations;
mod setup;

pub use algebra::{Factor, GenKind, Hecke, HeckeElt};
pub use families::{family_a_zeta, family_c_s2, family_d_s2, residues_of_o_f, x_a_big_a, x_ab_big_a, x_abc};
pub use group::{conjugate_module, perp_part, prime_part, skew_part, CosetFamily, Flavor, GroupJ, COSET_LIMIT};
pub use setup::{Block, CaseSetup, CentralizerSplit, ElemE, HeckeCase};
pub use indices::{alternating_words, lemma_index_exponent, zeta_index_exponent};
pub use relations::{relations, verify_all, verify_relation, FactorSpec, Relation, RelationReport, Term, Verdict, EXPANSION_WITNESSES, RANDOM_WITNESSES};
pub use eta::{eta_consistency, eta_negative_control, eta_relations, eta_scale, eta_support, support_words, EtaReport};
pub use checks::{ad_beta_graded_check, ad_graded, decomposition_dims, degenerate_beta, double_coset_separation, group_facts, intertwine_necessary, short_words, AdGraded, GradedDims, GroupFacts};
