//! Affine permutations over GF(3^k).

use rustc_hash::FxHashMap;

use super::CnfError;

/// Monic irreducible polynomials over GF(3), coefficients low to high.
const IRREDUCIBLE: [&[u8]; 6] = [
    &[0, 1],
    &[1, 0, 1],
    &[1, 0, 2, 1],
    &[1, 0, 1, 1, 1],
    &[1, 0, 0, 0, 2, 1],
    &[1, 0, 0, 0, 1, 1, 1],
];

/// GF(3^k) with elements encoded as integers whose base-3 digits are the
/// polynomial coefficients.
#[derive(Clone, Debug)]
pub struct Gf3k {
    k: u32,
    q: usize,
    add: Vec<u32>,
    mul: Vec<u32>,
}

impl Gf3k {
    pub fn new(k: u32) -> Result<Gf3k, CnfError> {
        if k == 0 || k as usize > IRREDUCIBLE.len() {
            return Err(CnfError::FieldTooLarge(k));
        }
        let q = 3usize.pow(k);
        let digits = |x: usize| -> Vec<u8> { (0..k).map(|i| (x / 3usize.pow(i) % 3) as u8).collect() };
        let encode = |d: &[u8]| -> u32 { d.iter().rev().fold(0, |acc, &c| acc * 3 + c as u32) };
        let modulus = IRREDUCIBLE[k as usize - 1];
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u8> = da.iter().zip(&db).map(|(x, y)| (x + y) % 3).collect();
                add[a * q + b] = encode(&sum);
                let mut prod = vec![0u8; 2 * k as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % 3;
                    }
                }
                for top in (k as usize..prod.len()).rev() {
                    let c = prod[top];
                    if c != 0 {
                        for (t, &mc) in modulus.iter().enumerate() {
                            let idx = top - k as usize + t;
                            prod[idx] = (prod[idx] + 3 - (c * mc) % 3) % 3;
                        }
                    }
                }
                mul[a * q + b] = encode(&prod[..k as usize]);
            }
        }
        Ok(Gf3k { k, q, add, mul })
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.q + b as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.q + b as usize]
    }
}

/// The maps `x ↦ a·x + b` with `a ≠ 0`, as permutations of `0..3m`.
#[derive(Clone, Debug)]
pub struct PermFamily {
    pub m: usize,
    maps: Vec<Vec<u32>>,
    index: FxHashMap<Vec<u32>, usize>,
}

impl PermFamily {
    /// Requires `m` to be a power of 3, so that `3m` is a field size.
    pub fn new(m: usize) -> Result<PermFamily, CnfError> {
        let k = field_degree(m)?;
        let f = Gf3k::new(k)?;
        let q = f.order() as u32;
        let mut maps = Vec::with_capacity((q * (q - 1)) as usize);
        for a in 1..q {
            for b in 0..q {
                maps.push((0..q).map(|x| f.add(f.mul(a, x), b)).collect::<Vec<u32>>());
            }
        }
        let index = maps.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(PermFamily { m, maps, index })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn get(&self, t: usize) -> &[u32] {
        &self.maps[t]
    }

    pub fn maps(&self) -> &[Vec<u32>] {
        &self.maps
    }

    pub fn index_of(&self, perm: &[u32]) -> Option<usize> {
        self.index.get(perm).copied()
    }

    /// Index of the inverse of member `t`.
    pub fn inverse(&self, t: usize) -> usize {
        let p = &self.maps[t];
        let mut inv = vec![0; p.len()];
        for (x, &y) in p.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        self.index[&inv]
    }
}

/// `k` with `3m = 3^k`.
pub(crate) fn field_degree(m: usize) -> Result<u32, CnfError> {
    if m == 0 {
        return Err(CnfError::ZeroParam);
    }
    let mut k = 1;
    let mut p = 1;
    while p < m {
        p *= 3;
        k += 1;
    }
    if p != m {
        return Err(CnfError::NotPowerOfThree(m));
    }
    Ok(k)
}
