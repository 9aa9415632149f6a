//! Combinatorial and arithmetic core: root data, Tits indices, real-form
//! tables, parabolic subgroups, Novikov-Shubin bookkeeping, torsion
//! verdicts and rational quadratic forms.

pub mod certificate;
pub mod ns_calculus;
pub mod parabolic;
pub mod qforms;
pub mod real_forms;
pub mod root_data;
pub mod tits_index;
pub mod torsion_ledger;

use thiserror::Error;

/// Errors from any core module, tagged by the module that raised them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("root_data: {0}")]
    RootData(#[from] root_data::RootDataError),
    #[error("tits_index: {0}")]
    TitsIndex(#[from] tits_index::TitsIndexError),
    #[error("parabolic: {0}")]
    Parabolic(#[from] parabolic::ParabolicError),
    #[error("ns_calculus: {0}")]
    Ns(#[from] ns_calculus::NsError),
    #[error("torsion_ledger: {0}")]
    Ledger(#[from] torsion_ledger::LedgerError),
    #[error("qforms: {0}")]
    Qform(#[from] qforms::QformError),
    #[error("real_forms: {0}")]
    RealForms(#[from] real_forms::RealFormError),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::RootData(_) => "root_data",
            Error::TitsIndex(_) => "tits_index",
            Error::RealForms(_) => "real_forms",
            Error::Parabolic(_) => "parabolic",
            Error::Ns(_) => "ns_calculus",
            Error::Ledger(_) => "torsion_ledger",
            Error::Qform(_) => "qforms",
        }
    }
}
