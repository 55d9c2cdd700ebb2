//! Switches that deliberately corrupt two formulas so the test suite can
//! prove it notices. Without the `mutation-hooks` feature every switch is a
//! constant `false`.

#[cfg(feature = "mutation-hooks")]
mod imp {
    use std::sync::atomic::{AtomicBool, Ordering};

    static GG_TILT_SIGN: AtomicBool = AtomicBool::new(false);
    static RISING_INDEX: AtomicBool = AtomicBool::new(false);

    /// Use `exp(β + λt)` for the generalized Gamma tilt.
    pub fn set_gg_tilt_sign_flip(on: bool) {
        GG_TILT_SIGN.store(on, Ordering::SeqCst);
    }

    /// Use `(1-α)_{n_j}` instead of `(1-α)_{n_j-1}` in the EPPF.
    pub fn set_rising_index_shift(on: bool) {
        RISING_INDEX.store(on, Ordering::SeqCst);
    }

    pub fn gg_tilt_sign_flip() -> bool {
        GG_TILT_SIGN.load(Ordering::SeqCst)
    }

    pub fn rising_index_shift() -> bool {
        RISING_INDEX.load(Ordering::SeqCst)
    }
}

#[cfg(not(feature = "mutation-hooks"))]
mod imp {
    #[inline(always)]
    pub fn gg_tilt_sign_flip() -> bool {
        false
    }

    #[inline(always)]
    pub fn rising_index_shift() -> bool {
        false
    }
}

pub use imp::*;
