//! Smith normal form over the integers.

/// Result of `U·A·V = D` with `U`, `V` unimodular and `D` diagonal with
/// `d_1 | d_2 | …`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
    pub diagonal: Vec<i128>,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// Smith normal form of an `r × c` integer matrix.
pub fn smith_normal_form(a: &[Vec<i64>]) -> SmithForm {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let swap_rows = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        m.swap(i, j);
        u.swap(i, j);
    };
    let swap_cols = |m: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    };

    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry in the trailing block
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0 && pivot.is_none_or(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return finish(m, u, v, diagonal, t);
            };
            swap_rows(&mut m, &mut u, t, pi);
            swap_cols(&mut m, &mut v, t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t] / m[t][t];
                if q != 0 {
                    for j in 0..cols {
                        m[i][j] -= q * m[t][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= q * u[t][j];
                    }
                }
                clean &= m[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = m[t][j] / m[t][t];
                if q != 0 {
                    for i in 0..rows {
                        m[i][j] -= q * m[i][t];
                    }
                    for i in 0..cols {
                        v[i][j] -= q * v[i][t];
                    }
                }
                clean &= m[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| m[i][j] % m[t][t] != 0));
            if let Some(i) = bad {
                for j in 0..cols {
                    m[t][j] += m[i][j];
                }
                for j in 0..rows {
                    u[t][j] += u[i][j];
                }
                continue;
            }
            break;
        }
        if m[t][t] < 0 {
            for j in 0..cols {
                m[t][j] = -m[t][j];
            }
            for j in 0..rows {
                u[t][j] = -u[t][j];
            }
        }
        diagonal.push(m[t][t]);
    }
    SmithForm { u, v, diagonal }
}

fn finish(_m: Vec<Vec<i128>>, u: Vec<Vec<i128>>, v: Vec<Vec<i128>>, mut diagonal: Vec<i128>, t: usize) -> SmithForm {
    let n = u.len().min(v.len());
    diagonal.extend(std::iter::repeat_n(0, n - t));
    SmithForm { u, v, diagonal }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let (r, k, c) = (a.len(), b.len(), b[0].len());
        (0..r).map(|i| (0..c).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
    }

    fn check(a: Vec<Vec<i64>>) {
        let s = smith_normal_form(&a);
        let a128: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let d = mul(&mul(&s.u, &a128), &s.v);
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(x, s.diagonal[i]);
                } else {
                    assert_eq!(x, 0, "off-diagonal entry");
                }
            }
        }
        for w in s.diagonal.windows(2) {
            if w[0] != 0 {
                assert_eq!(w[1] % w[0], 0, "divisibility chain {:?}", s.diagonal);
            }
        }
    }

    #[test]
    fn diagonalizes() {
        check(vec![vec![2, 0], vec![0, 3]]);
        check(vec![vec![4, 0, 2], vec![0, 2, 0]]);
        check(vec![vec![6, 0, 3], vec![0, 4, 2], vec![0, 0, 0]]);
        check(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        check(vec![vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn diag_2_3_is_1_6() {
        let s = smith_normal_form(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(s.diagonal, vec![1, 6]);
    }
}
