use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid mesh topology: {0}")]
    Topology(String),

    #[error("cell {cell} is not star-shaped with respect to its star center")]
    NonStarShaped { cell: usize },

    #[error("quadrature order {order} exceeds the implemented maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("singular mass matrix ({0})")]
    SingularMass(String),

    #[error("interior block of cell {cell} is singular")]
    SingularInterior { cell: usize },

    #[error("the Dirichlet boundary has no faces")]
    EmptyDirichlet,

    #[error("sparse factorization broke down at dof {dof} (pivot {pivot:e})")]
    SingularSystem { dof: usize, pivot: f64 },

    #[error("estimated {estimated} skeleton dofs exceed the budget of {cap}")]
    BudgetExceeded { estimated: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
