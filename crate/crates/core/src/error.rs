use thiserror::Error;

/// Problems found while reading or validating a model file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("rules for `{lhs}` sum to {sum}, expected 1")]
    BadRuleSum { lhs: String, sum: f64 },

    #[error("line {line}: epsilon rule for `{lhs}` is not allowed")]
    EpsilonRule { line: usize, lhs: String },

    #[error("line {line}: probability {prob} outside (0, 1]")]
    BadProbability { line: usize, prob: String },

    #[error("line {line}: duplicate {what}")]
    Duplicate { line: usize, what: String },

    #[error("useless nonterminals: {}", .0.join(", "))]
    UselessNonterminals(Vec<String>),

    #[error("start symbol `{0}` is not a nonterminal")]
    UnknownStart(String),

    #[error("no rules")]
    Empty,

    #[error("state `{state}` transitions sum to {sum}, expected 1")]
    BadTransitionSum { state: String, sum: f64 },

    #[error("plan `{0}` is not a nonterminal")]
    PlanNotNonterminal(String),

    #[error("start rule `{0}` is not of the form S -> <plan>")]
    NonUnitStartRule(String),

    #[error("plan `{plan}` has no rule {start} -> {plan}")]
    PlanWithoutStartRule { plan: String, start: String },

    #[error("no plans declared")]
    NoPlans,

    #[error("line {line}: unknown switch {switch}")]
    UnknownSwitch { line: usize, switch: String },

    #[error("line {line}: switch {switch} has no outcome {outcome}")]
    UnknownOutcome {
        line: usize,
        switch: String,
        outcome: String,
    },

    #[error("switch {switch} sums to {sum} after overrides, expected 1")]
    BadSwitchSum { switch: String, sum: f64 },
}

/// Failure of explanation-graph construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("goal universe exceeded {limit} goals")]
    GoalBudgetExceeded { limit: usize },
}

/// Failure of an equation solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("singular stratum {{{}}} (pivot {pivot:e}, spectral estimate {spectral})", .goals.join(", "))]
    Singular {
        goals: Vec<String>,
        pivot: f64,
        spectral: f64,
    },

    #[error("equation system is not linear at {goal} (alternative {alternative})")]
    NonLinear { goal: String, alternative: usize },

    #[error("fixpoint iteration needs a floating-point scalar")]
    FixpointNeedsFloat,

    #[error("value {value} of {goal} lies outside [0, 1]")]
    OutOfRange { goal: String, value: f64 },
}

/// Errors surfaced by the query layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("empty prefix")]
    EmptyPrefix,

    #[error("prefix has probability zero")]
    ZeroPrefix,

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("`{0}` is not a nonterminal")]
    UnknownNonterminal(String),

    #[error(transparent)]
    Build(#[from] BuildError),

    #[error(transparent)]
    Solve(#[from] SolveError),
}
