//! Pairing functions packing a (label, message) couple into one integer.

use std::fmt;

/// Largest packed value accepted: `8^20 = 2^60` beeps still fit a `u64`.
pub const MAX_PACK: u64 = 20;

/// φ(x, y) = x + (x+y)(x+y+1)/2, the diagonal enumeration of couples.
pub fn snake_phi(x: u64, y: u64) -> u64 {
    let d = x as u128 + y as u128;
    let z = x as u128 + d * (d + 1) / 2;
    u64::try_from(z).expect("snake_phi overflows u64")
}

/// The unique couple `(x, y)` with `snake_phi(x, y) = z`.
pub fn snake_phi_inverse(z: u64) -> (u64, u64) {
    // diagonal index w: largest with w(w+1)/2 <= z
    let mut w = ((8.0 * z as f64 + 1.0).sqrt() as u64).saturating_sub(1) / 2;
    let tri = |w: u64| w as u128 * (w as u128 + 1) / 2;
    while tri(w) > z as u128 {
        w -= 1;
    }
    while tri(w + 1) <= z as u128 {
        w += 1;
    }
    let x = z - tri(w) as u64;
    (x, w - x)
}

/// A known size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Known {
    /// Label space size.
    L(u64),
    /// Message space size.
    M(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PackError {
    #[error("label {label} or message {message} out of range for {known:?}")]
    OutOfRange { label: u64, message: u64, known: Known },
}

/// ψ(ℓ, m) = mL + ℓ when L is known, ψ′(ℓ, m) = ℓM + m when M is known.
pub fn pack_known(label: u64, message: u64, known: Known) -> Result<u64, PackError> {
    let err = PackError::OutOfRange { label, message, known };
    let (hi, lo, base) = match known {
        Known::L(l) if label < l => (message, label, l),
        Known::M(m) if message < m => (label, message, m),
        _ => return Err(err),
    };
    hi.checked_mul(base).and_then(|v| v.checked_add(lo)).ok_or(err)
}

/// Which pairing an Ad-hoc node uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Packing {
    Phi,
    /// ψ with the label space size.
    PsiL(u64),
    /// ψ′ with the message space size.
    PsiM(u64),
}

impl Packing {
    pub fn pack(self, label: u64, message: u64) -> Result<u64, PackError> {
        match self {
            Packing::Phi => Ok(snake_phi(label, message)),
            Packing::PsiL(l) => pack_known(label, message, Known::L(l)),
            Packing::PsiM(m) => pack_known(label, message, Known::M(m)),
        }
    }

    /// The message component of a packed value.
    pub fn message_of(self, z: u64) -> u64 {
        match self {
            Packing::Phi => snake_phi_inverse(z).1,
            Packing::PsiL(l) => z / l,
            Packing::PsiM(m) => z % m,
        }
    }
}

impl fmt::Display for Packing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Packing::Phi => write!(f, "phi"),
            Packing::PsiL(l) => write!(f, "psi-l({l})"),
            Packing::PsiM(m) => write!(f, "psi-m({m})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("soft beep heard before any loud beep")]
    SoftBeforeLoud,
}

/// Largest `z` with `8^z <= t`, for `t >= 1`.
pub fn log8_floor(t: u64) -> u64 {
    debug_assert!(t >= 1);
    (63 - t.leading_zeros() as u64) / 3
}

/// The Ad-hoc receive rule with the φ packing.
pub fn adhoc_try_decode(loud: u64, soft: u64) -> Result<Option<u64>, DecodeError> {
    adhoc_try_decode_with(loud, soft, Packing::Phi)
}

/// Once at least half as many soft as loud beeps were heard, the loud count
/// `t` satisfies `8^z <= t < 8^(z+1)` for the sender's packed value `z`.
pub fn adhoc_try_decode_with(
    loud: u64,
    soft: u64,
    packing: Packing,
) -> Result<Option<u64>, DecodeError> {
    if loud == 0 {
        return if soft > 0 { Err(DecodeError::SoftBeforeLoud) } else { Ok(None) };
    }
    if 2 * soft as u128 >= loud as u128 {
        Ok(Some(packing.message_of(log8_floor(loud))))
    } else {
        Ok(None)
    }
}
