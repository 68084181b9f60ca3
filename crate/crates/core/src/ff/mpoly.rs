use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Fe, Field, Ring};

/// Sorted list of `(variable, exponent)` with positive exponents.
pub type Monomial = Vec<(u32, u32)>;

/// Sparse multivariate polynomial over GF(2^m). Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MPoly {
    terms: BTreeMap<Monomial, Fe>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn constant(c: Fe) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MPoly { terms }
    }

    pub fn one() -> Self {
        Self::constant(Fe::ONE)
    }

    pub fn var(v: u32) -> Self {
        Self::term(Fe::ONE, vec![(v, 1)])
    }

    pub fn term(c: Fe, mono: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            let mono = mono.into_iter().filter(|&(_, e)| e > 0).collect();
            terms.insert(mono, c);
        }
        MPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Fe)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Fe> {
        match self.terms.len() {
            0 => Some(Fe::ZERO),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn variables(&self) -> BTreeSet<u32> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().map(|&(v, _)| v))
            .collect()
    }

    pub fn degree_in(&self, var: u32) -> u32 {
        self.terms
            .keys()
            .filter_map(|m| m.iter().find(|&&(v, _)| v == var).map(|&(_, e)| e))
            .max()
            .unwrap_or(0)
    }

    /// Largest exponent of any single variable.
    pub fn max_var_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.iter().map(|&(_, e)| e))
            .max()
            .unwrap_or(0)
    }

    /// Drops terms where `var` appears with exponent above `max`.
    pub fn truncate_in(&self, var: u32, max: u32) -> Self {
        MPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.iter().all(|&(v, e)| v != var || e <= max))
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    fn insert_add(terms: &mut BTreeMap<Monomial, Fe>, mono: Monomial, c: Fe) {
        if c.is_zero() {
            return;
        }
        match terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Substitutes `var := value`.
    pub fn substitute(&self, field: &Field, var: u32, value: Fe) -> Self {
        let mut terms = BTreeMap::new();
        for (m, &c) in &self.terms {
            match m.iter().position(|&(v, _)| v == var) {
                None => Self::insert_add(&mut terms, m.clone(), c),
                Some(i) => {
                    let e = m[i].1;
                    let coeff = field.mul(c, field.pow(value, e as u64));
                    let mut rest = m.clone();
                    rest.remove(i);
                    Self::insert_add(&mut terms, rest, coeff);
                }
            }
        }
        MPoly { terms }
    }

    /// Full evaluation; variables missing from `values` are treated as zero.
    pub fn eval(&self, field: &Field, values: &HashMap<u32, Fe>) -> Fe {
        let mut acc = Fe::ZERO;
        for (m, &c) in &self.terms {
            let mut t = c;
            for &(v, e) in m {
                let x = values.get(&v).copied().unwrap_or(Fe::ZERO);
                t = field.mul(t, field.pow(x, e as u64));
                if t.is_zero() {
                    break;
                }
            }
            acc += t;
        }
        acc
    }

    /// Terms in display order: descending total degree, then ascending `(var, exp)` lists.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, Fe)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by_key(|(m, _)| (Reverse(m.iter().map(|&(_, e)| e).sum::<u32>()), (*m).clone()));
        v
    }

    pub fn format(&self, vars: &VarTable) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in self.sorted_terms() {
            let mut factors: Vec<String> = Vec::new();
            if c != Fe::ONE || m.is_empty() {
                factors.push(c.0.to_string());
            }
            for &(v, e) in m {
                let name = vars.name(v);
                if e == 1 {
                    factors.push(name.to_string());
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

/// Names for polynomial variables; indices are assigned in registration order.
#[derive(Clone, Debug, Default)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `name`, registering it if new.
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn lookup(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: u32) -> &str {
        &self.names[v as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// The ring GF(2^m)[x_0, x_1, ...].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPolyRing {
    pub field: Field,
}

impl MPolyRing {
    pub fn new(field: Field) -> Self {
        MPolyRing { field }
    }
}

impl Ring for MPolyRing {
    type Elem = MPoly;

    fn zero(&self) -> MPoly {
        MPoly::zero()
    }
    fn one(&self) -> MPoly {
        MPoly::one()
    }
    fn add(&self, a: &MPoly, b: &MPoly) -> MPoly {
        let mut terms = a.terms.clone();
        for (m, &c) in &b.terms {
            MPoly::insert_add(&mut terms, m.clone(), c);
        }
        MPoly { terms }
    }
    fn neg(&self, a: &MPoly) -> MPoly {
        a.clone()
    }
    fn mul(&self, a: &MPoly, b: &MPoly) -> MPoly {
        let mut terms = BTreeMap::new();
        for (ma, &ca) in &a.terms {
            for (mb, &cb) in &b.terms {
                MPoly::insert_add(&mut terms, mono_mul(ma, mb), self.field.mul(ca, cb));
            }
        }
        MPoly { terms }
    }
    fn is_zero(&self, a: &MPoly) -> bool {
        a.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_two_cancellation() {
        let r = MPolyRing::new(Field::new(2).unwrap());
        let x = MPoly::var(0);
        assert!(r.add(&x, &x).is_zero());
        let y = MPoly::var(1);
        let s = r.add(&x, &y);
        // (x + y)^2 = x^2 + y^2 in characteristic 2
        let sq = r.mul(&s, &s);
        assert_eq!(sq.num_terms(), 2);
    }

    #[test]
    fn format_orders_terms() {
        let mut vars = VarTable::new();
        let d = vars.intern("D");
        let a = vars.intern("b(e3,e7)");
        let b = vars.intern("b(e6,e10)");
        let r = MPolyRing::new(Field::new(2).unwrap());
        let p = r.add(
            &MPoly::term(Fe::ONE, vec![(d, 3), (b, 1)]),
            &MPoly::term(Fe::ONE, vec![(d, 3), (a, 1)]),
        );
        assert_eq!(p.format(&vars), "D^3*b(e3,e7) + D^3*b(e6,e10)");
        let q = r.add(&MPoly::term(Fe(3), vec![(d, 2)]), &MPoly::one());
        assert_eq!(q.format(&vars), "3*D^2 + 1");
    }

    #[test]
    fn substitute_then_eval_agree() {
        let f = Field::new(3).unwrap();
        let r = MPolyRing::new(f.clone());
        let x = MPoly::var(0);
        let y = MPoly::var(1);
        let p = r.add(&r.mul(&x, &r.mul(&y, &y)), &MPoly::constant(Fe(5)));
        let sub = p.substitute(&f, 1, Fe(3));
        let vals: HashMap<u32, Fe> = [(0, Fe(6)), (1, Fe(3))].into_iter().collect();
        assert_eq!(sub.eval(&f, &vals), p.eval(&f, &vals));
        assert_eq!(p.max_var_degree(), 2);
        assert_eq!(p.degree_in(0), 1);
    }
}
