//! Small dense matrices over a prime field F_p, used only by the nilpotent
//! endomorphism sampler. Entries are reduced residues in `0..p`.

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModMat {
    pub p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ModMat {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        ModMat { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: u64) {
        let cur = self.at(r, c);
        self.set(r, c, (cur + v % self.p) % self.p);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &ModMat) -> ModMat {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.p, other.p);
        let p = self.p;
        let mut out = ModMat::zeros(p, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.at(k, c);
                    if b == 0 {
                        continue;
                    }
                    // p < 2^32 keeps a*b in range
                    out.add_at(r, c, a * b % p);
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let p = self.p as u128;
        let mut m: Vec<Vec<u128>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.at(r, c) as u128).collect())
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let mut pivot = None;
            for r in rank..self.rows {
                if m[r][col] != 0 {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(pr) = pivot else { continue };
            m.swap(rank, pr);
            let inv = mod_inv(m[rank][col] as u64, self.p) as u128;
            for c in col..self.cols {
                m[rank][c] = m[rank][c] * inv % p;
            }
            for r in 0..self.rows {
                if r != rank && m[r][col] != 0 {
                    let f = m[r][col];
                    for c in col..self.cols {
                        m[r][c] = (m[r][c] + p * p - f * m[rank][c] % p) % p;
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b = base as u128 % p as u128;
    base = 0;
    let _ = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        exp >>= 1;
    }
    acc as u64
}

pub fn mod_inv(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_mod_p() {
        let mut m = ModMat::zeros(101, 2, 2);
        m.set(0, 0, 1);
        m.set(0, 1, 2);
        m.set(1, 0, 2);
        m.set(1, 1, 4);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn inverse() {
        assert_eq!(mod_inv(3, 101) * 3 % 101, 1);
        assert!(is_prime(32003));
        assert!(!is_prime(32001));
    }
}
