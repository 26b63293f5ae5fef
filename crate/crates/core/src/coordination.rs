//! Coordinator alphabets and coordinators, conditional decomposability and
//! the flat and three-level conditional control properties.

use crate::alphabet::{merge_all, Alphabet, EventSet};
use crate::config::{CoordinatorScope, Limits};
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::ops;
use crate::props::{self, ControlContext, Verdict, Witness};

/// Events occurring in at least two of `alphabets`.
pub fn shared_events(alphabets: &[EventSet]) -> EventSet {
    let mut seen = EventSet::new();
    let mut shared = EventSet::new();
    for a in alphabets {
        for e in a {
            if !seen.insert(e.clone()) {
                shared.insert(e.clone());
            }
        }
    }
    shared
}

fn union(alphabets: &[EventSet]) -> EventSet {
    alphabets.iter().flatten().cloned().collect()
}

/// `K = ∥_i P_{i+k}(K)`, where `P_{i+k}` projects onto `A_i ∪ A_k`. Only
/// the inclusion of the product in `K` can fail; the witness is the
/// shortest word of the product outside `K`.
pub fn is_conditionally_decomposable(
    k: &Generator,
    alphabets: &[EventSet],
    a_k: &EventSet,
    limits: &Limits,
) -> Result<Verdict> {
    if alphabets.is_empty() {
        return Err(Error::Precondition("no component alphabets".into()));
    }
    let all = union(alphabets);
    if k.alphabet().names() != all {
        return Err(Error::AlphabetMismatch(format!(
            "specification over {:?}, components cover {:?}",
            k.alphabet().names(),
            all
        )));
    }
    if let Some(e) = a_k.iter().find(|e| !all.contains(*e)) {
        return Err(Error::AlphabetMismatch(format!(
            "coordinator event `{e}` occurs in no component"
        )));
    }
    if let Some(e) = shared_events(alphabets).iter().find(|e| !a_k.contains(*e)) {
        return Err(Error::Precondition(format!(
            "shared event `{e}` is missing from the coordinator alphabet"
        )));
    }
    let parts = alphabets
        .iter()
        .map(|a| ops::project(k, &a.union(a_k).cloned().collect(), limits))
        .collect::<Result<Vec<_>>>()?;
    let product = ops::product_all(&parts, limits)?;
    Ok(match ops::subset_witness(&product, k) {
        Some(word) => Verdict::fail(Witness::Word { word }),
        None => Verdict::pass(),
    })
}

/// Grows `seed` until `K` is conditionally decomposable. Each round adds
/// the lexicographically smallest event of the witness word that is not
/// yet in the coordinator alphabet (or, failing that, the smallest missing
/// event overall).
pub fn extend_for_cd(
    k: &Generator,
    alphabets: &[EventSet],
    seed: &EventSet,
    limits: &Limits,
) -> Result<EventSet> {
    let mut a_k = seed.clone();
    let all = union(alphabets);
    loop {
        let word = match is_conditionally_decomposable(k, alphabets, &a_k, limits)?.witness {
            None => return Ok(a_k),
            Some(Witness::Word { word }) => word,
            Some(other) => return Err(Error::Internal(format!("unexpected witness {other:?}"))),
        };
        let pick = word
            .iter()
            .filter(|e| !a_k.contains(*e))
            .min()
            .map(str::to_string)
            .or_else(|| all.iter().find(|e| !a_k.contains(*e)).cloned());
        match pick {
            Some(e) => {
                a_k.insert(e);
            }
            None => {
                return Err(Error::Internal(
                    "decomposability fails with the full alphabet".into(),
                ))
            }
        }
    }
}

/// `∥_i P_target(G_i)` lifted to `target`: the coordinator built from the
/// projections of the given subsystems.
pub fn build_coordinator<'a, I>(subsystems: I, target: &Alphabet, limits: &Limits) -> Result<Generator>
where
    I: IntoIterator<Item = &'a Generator>,
{
    let names = target.names();
    let parts = subsystems
        .into_iter()
        .map(|g| {
            let local: EventSet = g.alphabet().names().intersection(&names).cloned().collect();
            ops::project(g, &local, limits)
        })
        .collect::<Result<Vec<_>>>()?;
    if parts.is_empty() {
        return Ok(Generator::universal(target.clone()));
    }
    ops::lift(&ops::product_all(&parts, limits)?, target)
}

fn ctx_unc(ctx: &ControlContext, set: &EventSet) -> EventSet {
    ctx.uncontrollable.intersection(set).cloned().collect()
}

fn ctx_obs(ctx: &ControlContext, set: &EventSet) -> EventSet {
    ctx.observable.intersection(set).cloned().collect()
}

/// Shared skeleton of the flat conditional checks: the coordinator clause
/// `P_k(K)` against `L(G_k)`, then each `P_{i+k}(K)` against
/// `L(G_i) ∥ P_k(K)`.
fn flat_clauses<F>(
    k: &Generator,
    plants: &[Generator],
    coordinator: &Generator,
    limits: &Limits,
    check: F,
) -> Result<Verdict>
where
    F: Fn(&Generator, &Generator, &EventSet) -> Result<Verdict>,
{
    let a_k = coordinator.alphabet().names();
    let pk = ops::project(k, &a_k, limits)?;
    let v = check(&pk, coordinator, &a_k)?;
    if !v.holds {
        return Ok(v.in_clause("k"));
    }
    for (i, g) in plants.iter().enumerate() {
        let a_ik: EventSet = g.alphabet().names().union(&a_k).cloned().collect();
        let pik = ops::project(k, &a_ik, limits)?;
        let plant = ops::sync_product(g, &pk, limits)?;
        let v = check(&pik, &plant, &a_ik)?;
        if !v.holds {
            return Ok(v.in_clause(format!("{}+k", i + 1)));
        }
    }
    Ok(Verdict::pass())
}

/// `P_k(K)` controllable w.r.t. `L(G_k)` and each `P_{i+k}(K)` controllable
/// w.r.t. `L(G_i) ∥ P_k(K)`. The failing clause is `k` or `i+k` (1-based).
pub fn is_conditionally_controllable(
    k: &Generator,
    plants: &[Generator],
    coordinator: &Generator,
    ctx: &ControlContext,
    limits: &Limits,
) -> Result<Verdict> {
    flat_clauses(k, plants, coordinator, limits, |m, l, set| {
        props::is_controllable(m, l, &ctx_unc(ctx, set))
    })
}

/// Observability counterpart of [`is_conditionally_controllable`].
pub fn is_conditionally_observable(
    k: &Generator,
    plants: &[Generator],
    coordinator: &Generator,
    ctx: &ControlContext,
    limits: &Limits,
) -> Result<Verdict> {
    flat_clauses(k, plants, coordinator, limits, |m, l, set| {
        props::is_observable(m, l, &ctx.restrict(set))
    })
}

/// Subsystems with their grouping and a specification over the union of
/// their alphabets. Coordinator alphabets left as `None` are computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilevelSpec {
    pub subsystems: Vec<Generator>,
    /// Partition of `0..n` into groups (0-based).
    pub groups: Vec<Vec<usize>>,
    pub specification: Generator,
    pub high_alphabet: Option<EventSet>,
    pub group_alphabets: Option<Vec<EventSet>>,
    /// Extend the given (or seeded) alphabets until decomposability holds.
    pub auto_extend: bool,
}

impl MultilevelSpec {
    /// Validates the grouping, attribute consistency and the alphabet of
    /// the specification.
    pub fn new(
        subsystems: Vec<Generator>,
        groups: Vec<Vec<usize>>,
        specification: Generator,
        high_alphabet: Option<EventSet>,
        group_alphabets: Option<Vec<EventSet>>,
        auto_extend: bool,
    ) -> Result<Self> {
        let spec = MultilevelSpec {
            subsystems,
            groups,
            specification,
            high_alphabet,
            group_alphabets,
            auto_extend,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.subsystems.len();
        if n == 0 {
            return Err(Error::Precondition("no subsystems".into()));
        }
        if self.groups.is_empty() {
            return Err(Error::Precondition("no groups".into()));
        }
        let mut owner = vec![None; n];
        for (j, group) in self.groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::Precondition(format!("group {} is empty", j + 1)));
            }
            for &i in group {
                if i >= n {
                    return Err(Error::Precondition(format!(
                        "group {} names subsystem {} of {n}",
                        j + 1,
                        i + 1
                    )));
                }
                if owner[i].replace(j).is_some() {
                    return Err(Error::Precondition(format!(
                        "subsystem {} belongs to two groups",
                        i + 1
                    )));
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::Precondition(format!("subsystem {} has no group", i + 1)));
        }
        let alphabet = self.alphabet()?;
        alphabet.merge(self.specification.alphabet())?;
        if self.specification.alphabet().names() != alphabet.names() {
            return Err(Error::AlphabetMismatch(format!(
                "specification over {:?}, subsystems over {:?}",
                self.specification.alphabet().names(),
                alphabet.names()
            )));
        }
        let known = |set: &EventSet| alphabet.check_known(set);
        if let Some(a) = &self.high_alphabet {
            known(a)?;
        }
        if let Some(list) = &self.group_alphabets {
            if list.len() != self.groups.len() {
                return Err(Error::Precondition(format!(
                    "{} group alphabets for {} groups",
                    list.len(),
                    self.groups.len()
                )));
            }
            for a in list {
                known(a)?;
            }
        }
        Ok(())
    }

    /// The global alphabet `∪ A_i`.
    pub fn alphabet(&self) -> Result<Alphabet> {
        merge_all(self.subsystems.iter().map(Generator::alphabet))
    }

    pub fn context(&self) -> Result<ControlContext> {
        Ok(ControlContext::from_alphabet(&self.alphabet()?))
    }

    /// `A_{I_j}`.
    pub fn group_events(&self, j: usize) -> EventSet {
        self.groups[j]
            .iter()
            .flat_map(|&i| self.subsystems[i].alphabet().names())
            .collect()
    }

    /// Events shared between different groups.
    pub fn inter_group_shared(&self) -> EventSet {
        let per_group: Vec<EventSet> = (0..self.groups.len()).map(|j| self.group_events(j)).collect();
        shared_events(&per_group)
    }

    /// Events shared between subsystems of group `j`.
    pub fn intra_group_shared(&self, j: usize) -> EventSet {
        let alphabets: Vec<EventSet> = self.groups[j]
            .iter()
            .map(|&i| self.subsystems[i].alphabet().names())
            .collect();
        shared_events(&alphabets)
    }
}

/// A specification with finalized coordinator alphabets and coordinators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    pub subsystems: Vec<Generator>,
    pub groups: Vec<Vec<usize>>,
    pub specification: Generator,
    pub alphabet: Alphabet,
    pub context: ControlContext,
    /// `A_k`.
    pub high_alphabet: EventSet,
    /// `A_{k_j}`, each containing `A_k`.
    pub group_alphabets: Vec<EventSet>,
    /// `G_k`.
    pub high_coordinator: Generator,
    /// `G_{k_j}`.
    pub group_coordinators: Vec<Generator>,
}

/// Computes `A_k`: the given alphabet or the inter-group shared events,
/// extended for top-level decomposability when `auto_extend` is set.
pub fn finalize_high_alphabet(spec: &MultilevelSpec, limits: &Limits) -> Result<EventSet> {
    let shared = spec.inter_group_shared();
    let seed: EventSet = match &spec.high_alphabet {
        Some(a) if spec.auto_extend => a.union(&shared).cloned().collect(),
        Some(a) => a.clone(),
        None => shared,
    };
    if !spec.auto_extend {
        return Ok(seed);
    }
    let groups: Vec<EventSet> = (0..spec.groups.len()).map(|j| spec.group_events(j)).collect();
    extend_for_cd(&spec.specification, &groups, &seed, limits)
}

/// Component alphabets `A_i ∪ A_k`, `i ∈ I_j`, of the group-level
/// decomposability of `P_{I_j+k}(K)`.
fn group_components(spec: &MultilevelSpec, j: usize, a_k: &EventSet) -> Vec<EventSet> {
    spec.groups[j]
        .iter()
        .map(|&i| spec.subsystems[i].alphabet().names().union(a_k).cloned().collect())
        .collect()
}

/// Computes `A_{k_j} ⊇ A_k`: the given alphabet or the intra-group shared
/// events, extended for group-level decomposability when `auto_extend` is
/// set. The result must stay inside `A_{I_j} ∪ A_k`.
pub fn finalize_group_alphabet(
    spec: &MultilevelSpec,
    j: usize,
    a_k: &EventSet,
    limits: &Limits,
) -> Result<EventSet> {
    let base = match spec.group_alphabets.as_ref().map(|l| &l[j]) {
        Some(a) if !spec.auto_extend => a.clone(),
        Some(a) => a.union(&spec.intra_group_shared(j)).cloned().collect(),
        None => spec.intra_group_shared(j),
    };
    let seed: EventSet = base.union(a_k).cloned().collect();
    let scope: EventSet = spec.group_events(j).union(a_k).cloned().collect();
    if let Some(e) = seed.iter().find(|e| !scope.contains(*e)) {
        return Err(Error::Precondition(format!(
            "group {} coordinator event `{e}` belongs to neither the group nor the high-level coordinator",
            j + 1
        )));
    }
    if !spec.auto_extend {
        return Ok(seed);
    }
    let kj = ops::project(&spec.specification, &scope, limits)?;
    extend_for_cd(&kj, &group_components(spec, j, a_k), &seed, limits)
}

impl Hierarchy {
    /// Builds `G_k` and every `G_{k_j}` for finalized alphabets.
    pub fn assemble(
        spec: &MultilevelSpec,
        high_alphabet: EventSet,
        group_alphabets: Vec<EventSet>,
        scope: CoordinatorScope,
        limits: &Limits,
    ) -> Result<Hierarchy> {
        let alphabet = spec.alphabet()?;
        let high_coordinator =
            build_coordinator(&spec.subsystems, &alphabet.restrict(&high_alphabet)?, limits)?;
        let group_coordinators = group_alphabets
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let target = alphabet.restrict(a)?;
                match scope {
                    CoordinatorScope::AllSubsystems => {
                        build_coordinator(&spec.subsystems, &target, limits)
                    }
                    CoordinatorScope::GroupOnly => build_coordinator(
                        spec.groups[j].iter().map(|&i| &spec.subsystems[i]),
                        &target,
                        limits,
                    ),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Hierarchy {
            subsystems: spec.subsystems.clone(),
            groups: spec.groups.clone(),
            specification: spec.specification.clone(),
            context: ControlContext::from_alphabet(&alphabet),
            alphabet,
            high_alphabet,
            group_alphabets,
            high_coordinator,
            group_coordinators,
        })
    }

    pub fn subsystem_events(&self, i: usize) -> EventSet {
        self.subsystems[i].alphabet().names()
    }

    /// `A_{I_j}`.
    pub fn group_events(&self, j: usize) -> EventSet {
        self.groups[j]
            .iter()
            .flat_map(|&i| self.subsystem_events(i))
            .collect()
    }

    /// `A_i ∪ A_{k_j}` for the group `j` containing `i`.
    pub fn local_events(&self, i: usize, j: usize) -> EventSet {
        self.subsystem_events(i)
            .union(&self.group_alphabets[j])
            .cloned()
            .collect()
    }

    /// `A_{I_j} ∪ A_k`.
    pub fn group_high_events(&self, j: usize) -> EventSet {
        self.group_events(j).union(&self.high_alphabet).cloned().collect()
    }

    pub fn uncontrollable_in(&self, set: &EventSet) -> EventSet {
        ctx_unc(&self.context, set)
    }

    pub fn observable_in(&self, set: &EventSet) -> EventSet {
        ctx_obs(&self.context, set)
    }

    /// Three-level decomposability of the specification.
    pub fn is_3level_cd(&self, limits: &Limits) -> Result<Verdict> {
        self.is_3level_cd_of(&self.specification, limits)
    }

    /// `K = ∥_j P_{I_j+k}(K)` and, for every group,
    /// `P_{I_j+k}(K) = ∥_{i∈I_j} P_{i+k_j}(K)`. Clauses: `high`, `group j`.
    pub fn is_3level_cd_of(&self, k: &Generator, limits: &Limits) -> Result<Verdict> {
        let groups: Vec<EventSet> = (0..self.groups.len()).map(|j| self.group_events(j)).collect();
        let v = is_conditionally_decomposable(k, &groups, &self.high_alphabet, limits)?;
        if !v.holds {
            return Ok(v.in_clause("high"));
        }
        for j in 0..self.groups.len() {
            let kj = ops::project(k, &self.group_high_events(j), limits)?;
            let components: Vec<EventSet> = self.groups[j]
                .iter()
                .map(|&i| self.subsystem_events(i).union(&self.high_alphabet).cloned().collect())
                .collect();
            let v = is_conditionally_decomposable(&kj, &components, &self.group_alphabets[j], limits)?;
            if !v.holds {
                return Ok(v.in_clause(format!("group {}", j + 1)));
            }
        }
        Ok(Verdict::pass())
    }

    /// Shared skeleton of the three-level checks: for every group `j`,
    /// `P_{k_j}(M)` against `L(G_{k_j})`, then every `P_{i+k_j}(M)` against
    /// `L(G_i) ∥ P_{k_j}(M)`. Clauses are named `k{j}` and `{i}+k{j}`.
    fn three_level_clauses<F>(&self, m: &Generator, limits: &Limits, check: F) -> Result<Verdict>
    where
        F: Fn(&Generator, &Generator, &EventSet) -> Result<Verdict>,
    {
        for (j, group) in self.groups.iter().enumerate() {
            let a_kj = &self.group_alphabets[j];
            let pkj = ops::project(m, a_kj, limits)?;
            let v = check(&pkj, &self.group_coordinators[j], a_kj)?;
            if !v.holds {
                return Ok(v.in_clause(format!("k{}", j + 1)));
            }
            for &i in group {
                let local = self.local_events(i, j);
                let pikj = ops::project(m, &local, limits)?;
                let plant = ops::sync_product(&self.subsystems[i], &pkj, limits)?;
                let v = check(&pikj, &plant, &local)?;
                if !v.holds {
                    return Ok(v.in_clause(format!("{}+k{}", i + 1, j + 1)));
                }
            }
        }
        Ok(Verdict::pass())
    }

    /// Three-level conditional controllability of `m`.
    pub fn is_3level_cc(&self, m: &Generator, limits: &Limits) -> Result<Verdict> {
        self.three_level_clauses(m, limits, |x, l, set| {
            props::is_controllable(x, l, &self.uncontrollable_in(set))
        })
    }

    /// Three-level conditional normality of `m`.
    pub fn is_3level_cn(&self, m: &Generator, limits: &Limits) -> Result<Verdict> {
        self.three_level_clauses(m, limits, |x, l, set| {
            props::is_normal(x, l, &self.observable_in(set), limits)
        })
    }

    /// Both of the above, clause by clause, stopping at the first failure.
    pub fn is_3level_ccn(&self, m: &Generator, limits: &Limits) -> Result<Verdict> {
        self.three_level_clauses(m, limits, |x, l, set| {
            let v = props::is_controllable(x, l, &self.uncontrollable_in(set))?;
            if !v.holds {
                return Ok(v);
            }
            props::is_normal(x, l, &self.observable_in(set), limits)
        })
    }
}
