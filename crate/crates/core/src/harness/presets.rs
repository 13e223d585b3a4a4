use super::{CsiErrors, Mode, SchemeSpec, SweepSpec, SweepVariable};
use crate::beamformer::Scheme;
use crate::channel::DynamicErrorParams;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 7] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

fn all_schemes() -> Vec<SchemeSpec> {
    vec![
        SchemeSpec::MmseRzfOptimized,
        SchemeSpec::Fixed(Scheme::MfRzf),
        SchemeSpec::Fixed(Scheme::MfMf),
        SchemeSpec::Fixed(Scheme::ZfZf),
    ]
}

fn network(k: usize, e_sq: f64) -> NetworkConfig {
    NetworkConfig::from_snr_db(4, k, 10.0, 10.0, e_sq, e_sq).expect("preset network is valid")
}

fn grid(start: u32, end: u32, step: usize) -> Vec<f64> {
    (start..=end).step_by(step).map(f64::from).collect()
}

fn pedestrian_feedback() -> DynamicErrorParams {
    DynamicErrorParams {
        rho_tau: 0.0,
        t_tau: 0.0,
        feedback_bits: 24,
        doppler_hz: 10.0,
        delay_s: 0.005,
        training_error: Some(0.05),
    }
}

/// The sweep behind one of the figures, with 1000 trials and seed 42.
pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    let spec = match name {
        "fig2" => {
            let mut s = SweepSpec::new(
                SweepVariable::K,
                vec![5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0],
                network(5, 0.01),
                vec![
                    SchemeSpec::MmseRzfOptimized,
                    SchemeSpec::MmseRzf { alpha_mmse: 0.1, alpha_rzf: 0.1 },
                    SchemeSpec::MmseRzf { alpha_mmse: 1.0, alpha_rzf: 1.0 },
                ],
            );
            s.mode = Mode::Both;
            s
        }
        "fig3" => SweepSpec::new(SweepVariable::K, grid(2, 20, 2), network(2, 0.1), all_schemes()),
        "fig4" => SweepSpec::new(SweepVariable::ESq, vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3], network(3, 0.0), all_schemes()),
        "fig5" => {
            let mut s = SweepSpec::new(SweepVariable::PnrQnr, grid(0, 40, 5), network(5, 0.0), all_schemes());
            s.csi = vec![CsiErrors::Fixed { e1_sq: 0.0, e2_sq: 0.0 }, CsiErrors::Fixed { e1_sq: 0.1, e2_sq: 0.1 }];
            s
        }
        "fig6" => {
            let mut s = SweepSpec::new(SweepVariable::K, grid(1, 10, 1), network(1, 0.0), all_schemes());
            s.dynamic_error = Some(pedestrian_feedback());
            s
        }
        "fig7" | "fig8" => {
            let mut s = SweepSpec::new(SweepVariable::FeedbackBits, grid(4, 32, 4), network(4, 0.0), all_schemes());
            s.dynamic_error = Some(pedestrian_feedback());
            s.e1_override = Some(0.0);
            if name == "fig8" {
                s.csi = vec![CsiErrors::Template, CsiErrors::Fixed { e1_sq: 0.0, e2_sq: 0.0 }];
            }
            s
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    spec.validate()?;
    Ok(spec)
}
