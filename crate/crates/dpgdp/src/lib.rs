pub mod accountant;
pub mod compare;
pub mod compose;
pub mod curves;
pub mod error;
pub mod gdp;
pub mod mechanisms;
pub mod normal;
pub mod pld;
pub mod regret;
pub mod renyi;
pub mod sum;

pub use accountant::{account, Accounting, MechanismEntry, Report, RunConfig};
pub use compare::{compare, CompareRow, Representation};
pub use compose::{compose, compose_all, self_compose, ComposeOptions, CompositionStrategy};
pub use curves::{advantage, delta_at, epsilon_at, tradeoff_from_pld, tradeoff_from_profile, TradeoffCurve};
pub use error::{Error, Result};
pub use gdp::{calibrate_mu_to_adp, fit_mu, gdp_advantage, gdp_tradeoff, mu_to_epsilon, GdpBound};
pub use mechanisms::{Direction, MechanismKind, MechanismSpec};
pub use pld::{discretize_ctd, plrv_x_masses, DiscretePLD, LossGrid, PrivacyProfile};
pub use regret::{regret_to_gdp, regret_tradeoff};
pub use renyi::{compose_rdp, fit_zcdp, rdp_to_profile, Conversion, RdpCurve};
