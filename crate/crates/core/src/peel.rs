//! Relation-peeling decoder.
//!
//! Works only with the local relations found by the search. A relation whose
//! members are all known yields its output block; a relation whose block is
//! known and which has exactly one missing member yields that member. The
//! lowest-index eligible relation fires first, so plans are reproducible.

use serde::Serialize;

use crate::bilinear::{CTarget, ExpansionVector};
use crate::error::{Error, Result};
use crate::matrix::{Element, Matrix};
use crate::scheme::{FailurePattern, Scheme};
use crate::search::Relation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Recovered {
    Target(CTarget),
    Node(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanStep {
    /// Index into the scheme's local relations.
    pub relation: usize,
    pub recovered: Recovered,
}

/// Ordered recovery steps; `finals[t]` is the step producing output block `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecoveryPlan {
    pub steps: Vec<PlanStep>,
    pub finals: [usize; 4],
}

impl RecoveryPlan {
    /// One line per step, e.g. `C21 <- +S2+S4` or `S2 <- C21 via +S2+S4`.
    pub fn describe(&self, scheme: &Scheme) -> Vec<String> {
        let names = scheme.names();
        let locals = &scheme.relations.as_ref().expect("plan implies relations").locals;
        self.steps
            .iter()
            .map(|s| {
                let rel = &locals[s.relation];
                let expr = rel.expression(&names);
                match s.recovered {
                    Recovered::Target(t) => format!("{t} <- {expr}"),
                    Recovered::Node(i) => {
                        format!("{} <- {} via {expr}", names[i], rel.target().map(|t| t.label()).unwrap_or_default())
                    }
                }
            })
            .collect()
    }
}

fn locals(scheme: &Scheme) -> Result<&[Relation]> {
    scheme
        .relations
        .as_ref()
        .map(|r| r.locals.as_slice())
        .ok_or_else(|| Error::InvalidArgument(format!("scheme {} has no relation set attached", scheme.id)))
}

/// Iterative peeling; `Ok(None)` when some output block stays unknown.
pub fn peel(scheme: &Scheme, pattern: FailurePattern) -> Result<Option<RecoveryPlan>> {
    let relations = locals(scheme)?;
    let m = scheme.m();
    let mut known: Vec<bool> = (0..m).map(|i| !pattern.contains(i)).collect();
    let mut target_step: [Option<usize>; 4] = [None; 4];
    let mut steps = Vec::new();

    while target_step.iter().any(Option::is_none) {
        let next = relations.iter().enumerate().find_map(|(ri, rel)| {
            let t = rel.target()?;
            let mut missing = rel.members().filter(|&(i, _)| !known[i]).map(|(i, _)| i);
            let first = missing.next();
            let more = missing.next().is_some();
            match (target_step[t.which().ord()].is_some(), first, more) {
                (false, None, _) => Some(PlanStep { relation: ri, recovered: Recovered::Target(t) }),
                (true, Some(i), false) => Some(PlanStep { relation: ri, recovered: Recovered::Node(i) }),
                _ => None,
            }
        });
        let Some(step) = next else {
            return Ok(None);
        };
        match step.recovered {
            Recovered::Target(t) => target_step[t.which().ord()] = Some(steps.len()),
            Recovered::Node(i) => known[i] = true,
        }
        steps.push(step);
    }
    let finals = target_step.map(|s| s.expect("loop exits once all targets are known"));
    Ok(Some(RecoveryPlan { steps, finals }))
}

/// Replays a plan symbolically, checking each step only uses known items and
/// reproduces the expected expansion.
pub fn replay(scheme: &Scheme, pattern: FailurePattern, plan: &RecoveryPlan) -> Result<()> {
    let relations = locals(scheme)?;
    let expansions = scheme.expansions();
    let mut node: Vec<Option<ExpansionVector>> =
        (0..scheme.m()).map(|i| (!pattern.contains(i)).then(|| expansions[i])).collect();
    let mut target: [Option<ExpansionVector>; 4] = [None; 4];
    let fail = |k: usize, why: &str| Err(Error::CrossCheck(format!("plan step {k}: {why}")));

    for (k, step) in plan.steps.iter().enumerate() {
        let Some(rel) = relations.get(step.relation) else {
            return fail(k, "relation index out of range");
        };
        let Some(t) = rel.target() else {
            return fail(k, "not a local relation");
        };
        match step.recovered {
            Recovered::Target(want) => {
                if want != t {
                    return fail(k, "target mismatch");
                }
                let mut acc = ExpansionVector::ZERO;
                for (i, s) in rel.members() {
                    let Some(v) = node[i] else {
                        return fail(k, "member not yet known");
                    };
                    acc = acc + v.scaled(i32::from(s));
                }
                if acc != t.expansion() {
                    return fail(k, "sum differs from target");
                }
                target[t.which().ord()] = Some(acc);
            }
            Recovered::Node(j) => {
                let Some(mut acc) = target[t.which().ord()] else {
                    return fail(k, "target not yet known");
                };
                let mut sj = 0;
                for (i, s) in rel.members() {
                    if i == j {
                        sj = s;
                        continue;
                    }
                    let Some(v) = node[i] else {
                        return fail(k, "more than one unresolved member");
                    };
                    acc = acc - v.scaled(i32::from(s));
                }
                if sj == 0 {
                    return fail(k, "recovered node is not a member");
                }
                let v = acc.scaled(i32::from(sj));
                if v != expansions[j] {
                    return fail(k, "recovered value differs from node expansion");
                }
                node[j] = Some(v);
            }
        }
    }
    for (t, f) in CTarget::ALL.iter().zip(plan.finals) {
        let ok = matches!(plan.steps.get(f), Some(PlanStep { recovered: Recovered::Target(x), .. }) if x == t);
        if !ok || target[t.which().ord()].is_none() {
            return Err(Error::CrossCheck(format!("plan never produces {t}")));
        }
    }
    Ok(())
}

/// Executes a plan on numeric node results.
pub fn execute_plan<T: Element>(
    scheme: &Scheme,
    plan: &RecoveryPlan,
    values: &[Option<Matrix<T>>],
) -> Result<[Matrix<T>; 4]> {
    let relations = locals(scheme)?;
    let mut node: Vec<Option<Matrix<T>>> = values.to_vec();
    let mut target: [Option<Matrix<T>>; 4] = Default::default();
    let missing = |what: String| Error::InvalidArgument(format!("plan needs unknown {what}"));

    for step in &plan.steps {
        let rel = &relations[step.relation];
        let t = rel.target().ok_or_else(|| missing("target".into()))?;
        match step.recovered {
            Recovered::Target(_) => {
                let mut acc: Option<Matrix<T>> = None;
                for (i, s) in rel.members() {
                    let v = node[i].as_ref().ok_or_else(|| missing(scheme.terms[i].name().into()))?;
                    let term = if s > 0 { v.clone() } else { v.scale(-1) };
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term)?,
                    });
                }
                target[t.which().ord()] = acc;
            }
            Recovered::Node(j) => {
                let mut acc = target[t.which().ord()].clone().ok_or_else(|| missing(t.label()))?;
                let mut sj = 1;
                for (i, s) in rel.members() {
                    if i == j {
                        sj = s;
                        continue;
                    }
                    let v = node[i].as_ref().ok_or_else(|| missing(scheme.terms[i].name().into()))?;
                    acc = if s > 0 { acc.sub(v)? } else { acc.add(v)? };
                }
                node[j] = Some(if sj > 0 { acc } else { acc.scale(-1) });
            }
        }
    }
    let [a, b, c, d] = target;
    let get = |x: Option<Matrix<T>>, t: CTarget| x.ok_or_else(|| missing(t.label()));
    let [t0, t1, t2, t3] = CTarget::ALL;
    Ok([get(a, t0)?, get(b, t1)?, get(c, t2)?, get(d, t3)?])
}
