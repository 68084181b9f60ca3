//! Unit-delay networks, possibly cyclic: `M(D) = A(D) (I - D F)^-1 B(D)^T` over GF(2^m)(D).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ff::{DPolynomial, DRational, Fe, Field, MPoly, MPolyRing, Matrix, PolyRing, RationalField, Ring, VarTable};
use crate::network::{AdtNetwork, PortOrder};
use crate::seed;
use crate::transfer::{
    self, destination_offsets, source_offsets, total_destination_processes, total_source_processes,
    CodingAssignment,
};

/// Coefficients for a network with delay. Source and destination coefficients may be rational
/// functions of `D`; supernode-internal coefficients stay in the base field.
#[derive(Clone, Debug, Default)]
pub struct DelayAssignment {
    pub alpha: BTreeMap<(usize, usize, usize), DRational>,
    pub beta: BTreeMap<(usize, usize, usize), Fe>,
    pub epsilon: BTreeMap<(usize, usize, usize), DRational>,
}

impl DelayAssignment {
    /// Lifts a constant assignment.
    pub fn from_constant(a: &CodingAssignment) -> Self {
        let lift = |m: &BTreeMap<(usize, usize, usize), Fe>| {
            m.iter()
                .map(|(&k, &v)| (k, DRational::from_poly(DPolynomial::constant(v))))
                .collect()
        };
        DelayAssignment {
            alpha: lift(&a.alpha),
            beta: a.beta.clone(),
            epsilon: lift(&a.epsilon),
        }
    }

    fn beta_only(&self) -> CodingAssignment {
        CodingAssignment {
            beta: self.beta.clone(),
            ..CodingAssignment::default()
        }
    }
}

/// `I - D F` with polynomial entries.
pub fn i_minus_df(f: &Matrix<Fe>) -> Matrix<DPolynomial> {
    Matrix::from_fn(f.rows(), f.cols(), |r, c| {
        let mut coeffs = vec![Fe::ZERO; 2];
        if r == c {
            coeffs[0] = Fe::ONE;
        }
        // Characteristic two: -x = x.
        coeffs[1] = *f.get(r, c);
        DPolynomial::from_coeffs(coeffs)
    })
}

/// `det(I - D F)`; its constant coefficient is always one.
pub fn det_i_minus_df(field: &Field, f: &Matrix<Fe>) -> DPolynomial {
    i_minus_df(f).det_bareiss(&PolyRing::new(field.clone()))
}

/// `(I - D F)^-1` by elimination over the rational-function field.
pub fn inverse_i_minus_df(field: &Field, f: &Matrix<Fe>) -> Matrix<DRational> {
    let rf = RationalField::new(field.clone());
    let m = i_minus_df(f).map(|p| DRational::from_poly(p.clone()));
    m.inverse(&rf)
        .expect("I - DF has a determinant with constant term 1")
}

fn delay_a(net: &AdtNetwork, order: &PortOrder, assign: &DelayAssignment) -> Matrix<DRational> {
    let offsets = source_offsets(net);
    let mut a = Matrix::filled(total_source_processes(net), order.len(), DRational::from_poly(DPolynomial::zero()));
    for (&(s, i, e), c) in &assign.alpha {
        if let Some(&o) = offsets.get(&s) {
            a.set(o + i, order.output(s, e), c.clone());
        }
    }
    a
}

fn delay_b(net: &AdtNetwork, order: &PortOrder, assign: &DelayAssignment) -> Matrix<DRational> {
    let offsets = destination_offsets(net);
    let mut b = Matrix::filled(total_destination_processes(net), order.len(), DRational::from_poly(DPolynomial::zero()));
    for (&(t, x, k), c) in &assign.epsilon {
        if let Some(&o) = offsets.get(&t) {
            b.set(o + k, order.input(t, x), c.clone());
        }
    }
    b
}

/// `M(D)` for any network, cyclic or not. Rows are source processes, columns destination
/// processes.
pub fn delay_system_matrix(net: &AdtNetwork, assign: &DelayAssignment, field: &Field) -> Matrix<DRational> {
    let order = net.port_order();
    let f = transfer::build_f(net, &order, &assign.beta_only());
    let rf = RationalField::new(field.clone());
    let inv = inverse_i_minus_df(field, &f);
    let a = delay_a(net, &order, assign);
    let b = delay_b(net, &order, assign);
    a.mul(&rf, &inv).mul(&rf, &b.transpose())
}

/// `sum_{k=0}^{L} D^k F^k` truncated at degree `L`.
pub fn truncated_series(field: &Field, f: &Matrix<Fe>, max_degree: usize) -> Matrix<DPolynomial> {
    let pr = PolyRing::new(field.clone());
    let p = f.rows();
    let mut sum = Matrix::<DPolynomial>::identity(&pr, p);
    let mut power = Matrix::<Fe>::identity(field, p);
    for k in 1..=max_degree {
        power = power.mul(field, f);
        if power.is_zero(field) {
            break;
        }
        for (r, c, &v) in power.iter() {
            if !v.is_zero() {
                let cur = sum.get(r, c).clone();
                sum.set(r, c, pr.add(&cur, &DPolynomial::monomial(v, k)));
            }
        }
    }
    sum
}

/// Impulse response `A(D) (sum D^k F^k) B(D)^T` through degree `L`. Rational source or
/// destination coefficients are expanded as power series first.
pub fn truncated_delay_response(
    net: &AdtNetwork,
    assign: &DelayAssignment,
    field: &Field,
    max_degree: usize,
) -> Result<Matrix<DPolynomial>> {
    let order = net.port_order();
    let rf = RationalField::new(field.clone());
    let pr = PolyRing::new(field.clone());
    let expand = |m: Matrix<DRational>| -> Result<Matrix<DPolynomial>> {
        let mut out = Matrix::filled(m.rows(), m.cols(), DPolynomial::zero());
        for (r, c, e) in m.iter() {
            let s = rf.series(e, max_degree).ok_or_else(|| {
                Error::usage("coefficient has a pole at D = 0 and no power series")
            })?;
            out.set(r, c, s);
        }
        Ok(out)
    };
    let a = expand(delay_a(net, &order, assign))?;
    let b = expand(delay_b(net, &order, assign))?;
    let f = transfer::build_f(net, &order, &assign.beta_only());
    let s = truncated_series(field, &f, max_degree);
    let m = a.mul(&pr, &s).mul(&pr, &b.transpose());
    Ok(m.map(|p| p.truncate(max_degree)))
}

/// Symbolic `(I - D F)^-1` (or its truncation at `D^max_degree` when given) with `D` registered
/// first and then the `b(eX,eY)` variables. Cyclic networks require a truncation degree.
pub fn symbolic_delay_inverse(
    net: &AdtNetwork,
    field: &Field,
    max_degree: Option<usize>,
) -> Result<(Matrix<MPoly>, VarTable, PortOrder)> {
    let acyclic = net.is_acyclic();
    if !acyclic && max_degree.is_none() {
        return Err(Error::CyclicNetwork(
            "a symbolic inverse of a cyclic network needs a truncation degree".into(),
        ));
    }
    let order = net.port_order();
    let mut vars = VarTable::new();
    let d = vars.intern("D");
    let f = transfer::symbolic_f(net, &order, &mut vars);
    let ring = MPolyRing::new(field.clone());
    let p = order.len();
    let limit = max_degree.unwrap_or(p);
    let df = f.map(|e| ring.mul(e, &MPoly::var(d)));
    let mut sum = Matrix::<MPoly>::identity(&ring, p);
    let mut power = Matrix::<MPoly>::identity(&ring, p);
    for _ in 1..=limit {
        power = power.mul(&ring, &df);
        if power.is_zero(&ring) {
            break;
        }
        sum = sum.add(&ring, &power);
    }
    if let Some(l) = max_degree {
        sum = sum.map(|e| e.truncate_in(d, l as u32));
    }
    Ok((sum, vars, order))
}

/// Each connection's block of `M(D)` (demanded source rows by destination columns) has full row
/// rank over GF(2^m)(D).
pub fn connections_decodable(net: &AdtNetwork, m: &Matrix<DRational>, field: &Field) -> bool {
    let rf = RationalField::new(field.clone());
    let so = source_offsets(net);
    let dof = destination_offsets(net);
    net.connections().iter().all(|c| {
        let rows: Vec<usize> = c.processes.iter().map(|&i| so[&c.source] + i).collect();
        let nu = net.destination(c.destination).map_or(0, |d| d.processes);
        let cols: Vec<usize> = (dof[&c.destination]..dof[&c.destination] + nu).collect();
        let block = m.submatrix(&rows, &cols);
        if block.is_square() {
            !rf.det_cleared(&block).is_zero()
        } else {
            block.rank(&rf) == rows.len()
        }
    })
}

/// Draws up to `attempts` constant assignments and reports whether one of them makes every
/// connection decodable over GF(2^m)(D). The determinant test is exact.
pub fn delay_feasible_multicast(net: &AdtNetwork, field: &Field, attempts: usize, seed: u64) -> Result<bool> {
    for k in 0..attempts as u64 {
        let mut rng = seed::rng(seed, &[k]);
        let a = CodingAssignment::random(net, field, &mut rng);
        let m = delay_system_matrix(net, &DelayAssignment::from_constant(&a), field);
        if connections_decodable(net, &m, field) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Substitutes `D := 1` into every entry.
pub fn eval_at_one(field: &Field, m: &Matrix<DRational>) -> Result<Matrix<Fe>> {
    let mut out = Matrix::filled(m.rows(), m.cols(), Fe::ZERO);
    for (r, c, e) in m.iter() {
        let den = e.denominator().eval(field, Fe::ONE);
        let v = field
            .div(e.numerator().eval(field, Fe::ONE), den)
            .ok_or(Error::SingularMatrix)?;
        out.set(r, c, v);
    }
    Ok(out)
}
