//! Builders for the example families.
//!
//! Normalisation: the distinguished Cartan generator `z0` always acts with
//! `ad`-eigenvalues `±i` on the simple rank-one algebras (in `sl2` it is
//! `½(e - f)`, the matrix `½[[0,1],[-1,0]]`) and with `±i/2` on the
//! Heisenberg part of the oscillator algebra. Any other choice rescales all
//! root functionals by a common factor.

use nalgebra::{DMatrix, DVector};

use super::{unit, AlgebraError, DecompositionMeta, LieAlgebra};

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn all_basis(d: usize) -> Vec<DVector<f64>> {
    (0..d).map(|i| unit(d, i)).collect()
}

fn vec_of(v: &[f64]) -> DVector<f64> {
    DVector::from_vec(v.to_vec())
}

/// `sl2(R)` in the basis `(h, e, f)` with `[h,e] = 2e`, `[h,f] = -2f`,
/// `[e,f] = h`; Cartan `t = R z0`, `z0 = ½(e - f)`.
pub fn build_sl2() -> LieAlgebra {
    let meta = DecompositionMeta {
        cartan: vec![vec_of(&[0.0, 0.5, -0.5])],
        levi: all_basis(3),
        ..Default::default()
    };
    LieAlgebra::from_triples(
        "sl2",
        names(&["h", "e", "f"]),
        &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)],
        Some(meta),
    )
    .expect("sl2 is a valid Lie algebra")
}

/// `su2` with `[u1,u2] = u3` and cyclic; Cartan `t = R u3`.
pub fn build_su2() -> LieAlgebra {
    let meta = DecompositionMeta {
        cartan: vec![unit(3, 2)],
        levi: all_basis(3),
        ..Default::default()
    };
    LieAlgebra::from_triples(
        "su2",
        names(&["u1", "u2", "u3"]),
        &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)],
        Some(meta),
    )
    .expect("su2 is a valid Lie algebra")
}

/// `so(1,2) ≅ sl2(R)` in the Minkowski basis `(z0, b1, b2)` with
/// `z0 = ½(e - f)`, `b1 = ½h`, `b2 = ½(e + f)`. The Killing form is
/// `diag(-2, 2, 2)`, so dual coordinates carry the Lorentz form
/// `x0² - x1² - x2²`.
pub fn build_so12() -> LieAlgebra {
    let meta = DecompositionMeta {
        cartan: vec![unit(3, 0)],
        levi: all_basis(3),
        ..Default::default()
    };
    LieAlgebra::from_triples(
        "so12",
        names(&["z0", "b1", "b2"]),
        &[(0, 1, 2, -1.0), (0, 2, 1, 1.0), (1, 2, 0, 1.0)],
        Some(meta),
    )
    .expect("so(1,2) is a valid Lie algebra")
}

/// Heisenberg algebra `heis_{2n+1}` with basis `(c, q1..qn, p1..pn)` and
/// `[q_k, p_k] = c`, i.e. `[v, w] = Ω(v, w) c` for the standard form
/// `Ω(u, v) = uᵀ J v`, `J = [[0, I], [-I, 0]]`. No Cartan subalgebra is
/// attached (none is self-centralizing).
pub fn build_heis(n: usize) -> LieAlgebra {
    let d = 2 * n + 1;
    let mut basis = vec!["c".to_string()];
    basis.extend((1..=n).map(|k| format!("q{k}")));
    basis.extend((1..=n).map(|k| format!("p{k}")));
    let triples: Vec<_> = (0..n).map(|k| (k + 1, n + k + 1, 0, 1.0)).collect();
    let meta = DecompositionMeta {
        center: vec![unit(d, 0)],
        v_space: (1..d).map(|i| unit(d, i)).collect(),
        ..Default::default()
    };
    LieAlgebra::from_triples(format!("heis{d}"), basis, &triples, Some(meta))
        .expect("Heisenberg algebra is valid")
}

/// The abelian algebra `R^k`; every element is central and `t = g`.
pub fn build_abelian(k: usize) -> LieAlgebra {
    let basis = (1..=k).map(|i| format!("a{i}")).collect();
    let meta = DecompositionMeta {
        center: all_basis(k),
        cartan: all_basis(k),
        ..Default::default()
    };
    LieAlgebra::from_triples(format!("R{k}"), basis, &[], Some(meta)).expect("abelian algebra is valid")
}

/// Standard symplectic matrix `J = [[0, I], [-I, 0]]` of size `2n`.
pub fn symplectic_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// Index pairs `(a, b)`, `a <= b`, labelling the basis `x_ab = J S_ab` of
/// `sp(2n)`, where `S_ab` is the symmetric elementary matrix.
fn sp_index(n: usize) -> Vec<(usize, usize)> {
    let m = 2 * n;
    let mut out = Vec::new();
    for a in 0..m {
        for b in a..m {
            out.push((a, b));
        }
    }
    out
}

/// Basis matrices of `sp(2n, R)`. With `x = J S`, the quadratic Hamiltonian
/// is `½ Ω(xv, v) = ½ vᵀ S v`.
pub fn sp_basis_matrices(n: usize) -> Vec<DMatrix<f64>> {
    let m = 2 * n;
    let j = symplectic_j(n);
    sp_index(n)
        .into_iter()
        .map(|(a, b)| {
            let mut s = DMatrix::zeros(m, m);
            s[(a, b)] = 1.0;
            s[(b, a)] = 1.0;
            &j * s
        })
        .collect()
}

/// Coordinates of `x ∈ sp(2n)` in the basis of [`sp_basis_matrices`].
pub fn sp_coords(n: usize, x: &DMatrix<f64>) -> DVector<f64> {
    let s = -symplectic_j(n) * x;
    let idx = sp_index(n);
    DVector::from_iterator(
        idx.len(),
        idx.iter().map(|&(a, b)| s[(a, b)]),
    )
}

/// Matrix of `x ∈ sp(2n)` from its coordinates.
pub fn sp_matrix(n: usize, coords: &[f64]) -> DMatrix<f64> {
    let basis = sp_basis_matrices(n);
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for (c, b) in coords.iter().zip(basis.iter()) {
        out += b * *c;
    }
    out
}

/// `sp(2n, R)` as an abstract algebra.
pub fn build_sp(n: usize) -> LieAlgebra {
    let basis = sp_basis_matrices(n);
    let labels = sp_index(n)
        .into_iter()
        .map(|(a, b)| format!("x{}{}", a + 1, b + 1))
        .collect();
    LieAlgebra::from_bracket_fn(format!("sp{}", 2 * n), labels, |i, j| {
        let c = &basis[i] * &basis[j] - &basis[j] * &basis[i];
        sp_coords(n, &c)
    })
    .expect("sp(2n) is a valid Lie algebra")
}

/// Direct sum `a ⊕ b`; metadata is concatenated when both summands carry it.
pub fn direct_sum(a: &LieAlgebra, b: &LieAlgebra) -> LieAlgebra {
    let (da, db) = (a.dim(), b.dim());
    let d = da + db;
    let collide = a.basis_names().iter().any(|n| b.basis_names().contains(n));
    let mut basis: Vec<String> = Vec::with_capacity(d);
    for n in a.basis_names() {
        basis.push(if collide { format!("{n}_1") } else { n.clone() });
    }
    for n in b.basis_names() {
        basis.push(if collide { format!("{n}_2") } else { n.clone() });
    }
    let mut triples = a.triples();
    triples.extend(b.triples().into_iter().map(|(i, j, k, c)| (i + da, j + da, k + da, c)));
    let embed = |v: &DVector<f64>, offset: usize| {
        let mut out = DVector::zeros(d);
        out.rows_mut(offset, v.len()).copy_from(v);
        out
    };
    let meta = match (a.meta(), b.meta()) {
        (Some(ma), Some(mb)) => {
            let join = |x: &[DVector<f64>], y: &[DVector<f64>]| -> Vec<DVector<f64>> {
                x.iter()
                    .map(|v| embed(v, 0))
                    .chain(y.iter().map(|v| embed(v, da)))
                    .collect()
            };
            // a summand without a Cartan subalgebra leaves the sum without one
            let cartan = if ma.has_cartan() && mb.has_cartan() {
                join(&ma.cartan, &mb.cartan)
            } else {
                Vec::new()
            };
            Some(DecompositionMeta {
                center: join(&ma.center, &mb.center),
                cartan,
                v_space: join(&ma.v_space, &mb.v_space),
                levi: join(&ma.levi, &mb.levi),
            })
        }
        _ => None,
    };
    LieAlgebra::from_triples(format!("{}+{}", a.name(), b.name()), basis, &triples, meta)
        .expect("direct sum of valid algebras is valid")
}

/// Semidirect sum `u ⋊ l` where `action[i]` is the derivation of `u` by the
/// `i`-th basis element of `l`. The result carries no metadata.
pub fn semidirect(u: &LieAlgebra, l: &LieAlgebra, action: &[DMatrix<f64>]) -> Result<LieAlgebra, AlgebraError> {
    let (du, dl) = (u.dim(), l.dim());
    if action.len() != dl {
        return Err(AlgebraError::DimensionMismatch {
            expected: dl,
            found: action.len(),
        });
    }
    for a in action {
        if a.nrows() != du || a.ncols() != du {
            return Err(AlgebraError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
    }
    let d = du + dl;
    let mut basis: Vec<String> = u.basis_names().to_vec();
    basis.extend(l.basis_names().iter().cloned());
    LieAlgebra::from_bracket_fn(format!("{}x{}", u.name(), l.name()), basis, |i, j| {
        let mut out = DVector::zeros(d);
        match (i < du, j < du) {
            (true, true) => {
                out.rows_mut(0, du).copy_from(&u.bracket_vec(&unit(du, i), &unit(du, j)));
            }
            (true, false) => {
                // [u_i, l_j] = -D(l_j) u_i
                out.rows_mut(0, du).copy_from(&(-action[j - du].column(i)));
            }
            (false, true) => {
                out.rows_mut(0, du).copy_from(&action[i - du].column(j));
            }
            (false, false) => {
                out.rows_mut(du, dl)
                    .copy_from(&l.bracket_vec(&unit(dl, i - du), &unit(dl, j - du)));
            }
        }
        out
    })
}

/// Heisenberg action of `x ∈ sp(2n)` as a derivation on `(c, v)`.
fn heis_derivation(n: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
    let d = 2 * n + 1;
    let mut m = DMatrix::zeros(d, d);
    m.view_mut((1, 1), (2 * n, 2 * n)).copy_from(x);
    m
}

/// Oscillator algebra `heis3 ⋊ R z0` with `z0` acting on `V = R²` by
/// `½J`; roots `±α` with `iα(z0) = ±½`. Basis `(c, q, p, z0)`.
pub fn build_osc() -> LieAlgebra {
    let heis = build_heis(1);
    let rot = LieAlgebra::from_triples("so2", vec!["z0".into()], &[], None).expect("so2 is valid");
    let half_j = symplectic_j(1) * 0.5;
    let g = semidirect(&heis, &rot, &[heis_derivation(1, &half_j)]).expect("oscillator algebra is valid");
    let meta = DecompositionMeta {
        center: vec![unit(4, 0)],
        cartan: vec![unit(4, 0), unit(4, 3)],
        v_space: vec![unit(4, 1), unit(4, 2)],
        levi: vec![unit(4, 3)],
    };
    g.with_meta(meta).expect("oscillator metadata is valid").renamed("osc")
}

/// `hsp(2n) = heis_{2n+1} ⋊ sp(2n)`, the quadratic Hamiltonians
/// `H_{c,w,x}(v) = c + Ω(w, v) + ½Ω(xv, v)` under the Poisson bracket.
/// Basis `(c, q.., p.., x_ab..)`; Cartan `span(c, z_1..z_n)` with
/// `z_k = ½J` acting in the `(q_k, p_k)` plane.
pub fn build_hsp(n: usize) -> LieAlgebra {
    let heis = build_heis(n);
    let sp = build_sp(n);
    let action: Vec<DMatrix<f64>> = sp_basis_matrices(n)
        .iter()
        .map(|x| heis_derivation(n, x))
        .collect();
    let g = semidirect(&heis, &sp, &action).expect("hsp is valid");
    let hd = 2 * n + 1;
    let d = g.dim();
    let mut cartan = vec![unit(d, 0)];
    for k in 0..n {
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s[(k, k)] = 1.0;
        s[(n + k, n + k)] = 1.0;
        let zk = symplectic_j(n) * s * 0.5;
        let coords = sp_coords(n, &zk);
        let mut v = DVector::zeros(d);
        v.rows_mut(hd, coords.len()).copy_from(&coords);
        cartan.push(v);
    }
    let meta = DecompositionMeta {
        center: vec![unit(d, 0)],
        cartan,
        v_space: (1..hd).map(|i| unit(d, i)).collect(),
        levi: (hd..d).map(|i| unit(d, i)).collect(),
    };
    g.with_meta(meta).expect("hsp metadata is valid").renamed(format!("hsp{}", 2 * n))
}

/// Euclidean motion algebra `mot2 = R² ⋊ so2`, basis `(p1, p2, r)` with
/// `[r, p1] = p2`, `[r, p2] = -p1`.
pub fn build_mot2() -> LieAlgebra {
    let meta = DecompositionMeta {
        cartan: vec![unit(3, 2)],
        v_space: vec![unit(3, 0), unit(3, 1)],
        levi: vec![unit(3, 2)],
        ..Default::default()
    };
    LieAlgebra::from_triples(
        "mot2",
        names(&["p1", "p2", "r"]),
        &[(0, 2, 1, -1.0), (1, 2, 0, 1.0)],
        Some(meta),
    )
    .expect("mot2 is a valid Lie algebra")
}
