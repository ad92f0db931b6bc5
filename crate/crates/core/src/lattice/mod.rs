//! Grids, grid functions, measures and operator assembly.

mod function;
mod grid;
mod measure;
mod operator;
mod sparse;

pub use function::{GridFunction, NodeSet};
pub use grid::{build_grid, Grid, GridSpec, Point, DEFAULT_NODE_BUDGET};
pub use measure::DiscreteMeasure;
pub use operator::{
    add_measure, assemble_dirichlet_laplacian, assemble_schrodinger, klmn_ladder, quadratic_form,
    FormBoundPair, Frame, Klmn, SymmetricOperator,
};
pub use sparse::CsrMatrix;
