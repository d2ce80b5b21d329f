use super::grammar::{Pcfg, RawGrammar, Sym};
use crate::error::ModelError;
use crate::scalar::Scalar;

/// A PCFG whose start symbol expands only by unit rules `S -> y` to plan
/// nonterminals, together with the declared plans.
#[derive(Debug, Clone)]
pub struct PlanModel<T> {
    pcfg: Pcfg<T>,
    plans: Vec<(Sym, T)>,
}

impl<T: Scalar> PlanModel<T> {
    pub fn pcfg(&self) -> &Pcfg<T> {
        &self.pcfg
    }

    /// Declared plans with their selection probability `θ(S -> y)`.
    pub fn plans(&self) -> &[(Sym, T)] {
        &self.plans
    }
}

pub fn parse_plan_model<T: Scalar>(text: &str) -> Result<PlanModel<T>, ModelError> {
    parse_plan_model_with_start(text, None)
}

pub fn parse_plan_model_with_start<T: Scalar>(
    text: &str,
    start: Option<&str>,
) -> Result<PlanModel<T>, ModelError> {
    let raw = RawGrammar::parse(text)?;
    let pcfg = Pcfg::<T>::from_raw(&raw, start)?;
    let g = pcfg.grammar();
    let s = g.start();
    for &id in g.rules_for(s) {
        let rhs = &g.rule(id).rhs;
        if rhs.len() != 1 || !g.is_nonterminal(rhs[0]) {
            return Err(ModelError::NonUnitStartRule(g.render_rule(id)));
        }
    }
    if raw.plans.is_empty() {
        return Err(ModelError::NoPlans);
    }
    let mut plans = Vec::new();
    for (line, name) in &raw.plans {
        let y = g
            .nonterminal(name)
            .ok_or_else(|| ModelError::PlanNotNonterminal(name.clone()))?;
        if plans.iter().any(|&(p, _)| p == y) {
            return Err(ModelError::Duplicate {
                line: *line,
                what: format!("plan `{name}`"),
            });
        }
        let rule = g
            .rules_for(s)
            .iter()
            .copied()
            .find(|&id| g.rule(id).rhs[0] == y)
            .ok_or_else(|| ModelError::PlanWithoutStartRule {
                plan: name.clone(),
                start: g.name(s).to_string(),
            })?;
        plans.push((y, pcfg.prob(rule)));
    }
    Ok(PlanModel { pcfg, plans })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const PLANS: &str = "\
start S
S -> Pl : 0.1
S -> St : 0.4
S -> Cl : 0.3
S -> Mo : 0.2
Pl -> play : 0.5
Pl -> play Pl : 0.3
Pl -> Cl : 0.1
Pl -> Mo : 0.1
St -> study : 0.1
St -> study St : 0.3
St -> Pl St : 0.2
St -> Cl St : 0.4
Cl -> clean : 0.4
Cl -> clean Cl : 0.5
Cl -> Pl Cl : 0.1
Mo -> mow : 0.3
Mo -> mow Mo : 0.1
Mo -> Pl Mo : 0.4
Mo -> Cl Mo : 0.2
";

    #[test]
    fn four_plans() {
        let text = format!("{PLANS}plan Pl\nplan St\nplan Cl\nplan Mo\n");
        let m: PlanModel<f64> = parse_plan_model(&text).unwrap();
        let g = m.pcfg().grammar();
        let names: Vec<(&str, f64)> = m.plans().iter().map(|&(y, p)| (g.name(y), p)).collect();
        assert_eq!(names, vec![("Pl", 0.1), ("St", 0.4), ("Cl", 0.3), ("Mo", 0.2)]);
    }

    #[test]
    fn plan_subset() {
        let m: PlanModel<f64> = parse_plan_model(&format!("{PLANS}plan Pl\n")).unwrap();
        assert_eq!(m.plans().len(), 1);
    }

    #[test]
    fn plan_errors() {
        let err = parse_plan_model::<f64>("start S\nS -> a : 1\nplan a\n").unwrap_err();
        assert!(matches!(err, ModelError::NonUnitStartRule(_)), "{err:?}");
        let err = parse_plan_model::<f64>(&format!("{PLANS}plan play\n")).unwrap_err();
        assert!(matches!(err, ModelError::PlanNotNonterminal(_)), "{err:?}");
        let err = parse_plan_model::<f64>(PLANS).unwrap_err();
        assert_eq!(err, ModelError::NoPlans);
        let err = parse_plan_model::<f64>(&format!("{PLANS}plan S\n")).unwrap_err();
        assert!(matches!(err, ModelError::PlanWithoutStartRule { .. }), "{err:?}");
    }
}
