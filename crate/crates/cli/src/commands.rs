use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use moondisp_core::engine::{
    parse_survey_csv, run_closed_loop, survey_proportions, SessionConfig, SessionState, SimulatedObserver,
};
use moondisp_core::geometry::{expansion_curve as curve, write_curve_csv, AngularQuantity, CurvePoint};
use moondisp_core::models::ComparisonInput;
use moondisp_core::numfmt::{round_sig9, sig9};
use moondisp_core::render::{encode_image, render_stereo, ImageFormat, Presentation, StimulusFile};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::{CliError, Format, Layout};

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(&read_input(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(out))
        .map_err(|e| CliError::Runtime(format!("stdout: {e}")))
}

/// `steps` evenly spaced points from `r_min` to `r_max`, ends included.
fn ratio_samples(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    let in_range = |r: f64| (0.0..1.0).contains(&r);
    if !in_range(r_min) || !in_range(r_max) {
        return Err(CliError::Usage(format!(
            "ratios must lie in [0, 1), got {r_min}..{r_max}"
        )));
    }
    if r_min > r_max {
        return Err(CliError::Usage(format!("--r-min {r_min} exceeds --r-max {r_max}")));
    }
    match steps {
        0 => Err(CliError::Usage("--steps must be at least 1".into())),
        1 if r_min == r_max => Ok(vec![r_min]),
        1 => Err(CliError::Usage("a single step needs --r-min equal to --r-max".into())),
        _ if r_min == r_max => Err(CliError::Usage("--r-min equals --r-max; use --steps 1".into())),
        _ => Ok((0..steps)
            .map(|i| r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64)
            .collect()),
    }
}

fn curve_svg(points: &[CurvePoint<f64>]) -> String {
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let (r0, r1) = (points[0].ratio, points[points.len() - 1].ratio);
    let m_max = points.iter().map(|p| p.magnification).fold(1.0, f64::max);
    let x = |r: f64| {
        if r1 > r0 {
            pad + (r - r0) / (r1 - r0) * (w - 2.0 * pad)
        } else {
            w / 2.0
        }
    };
    let y = |m: f64| {
        if m_max > 1.0 {
            h - pad - (m - 1.0) / (m_max - 1.0) * (h - 2.0 * pad)
        } else {
            h / 2.0
        }
    };
    let coords: Vec<String> = points
        .iter()
        .map(|p| format!("{},{}", sig9(x(p.ratio)), sig9(y(p.magnification))))
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"{}\"/>\n</svg>\n",
        coords.join(" ")
    )
}

pub fn expansion_curve(
    theta_deg: f64,
    r_min: f64,
    r_max: f64,
    steps: usize,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    if !(theta_deg > 0.0 && theta_deg < 180.0) {
        return Err(CliError::Usage(format!(
            "--theta-deg must lie in (0, 180), got {theta_deg}"
        )));
    }
    let samples = ratio_samples(r_min, r_max, steps)?;
    let points =
        curve(AngularQuantity::from_degrees(theta_deg), &samples).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut csv = Vec::new();
    write_curve_csv(&points, &mut csv).map_err(|e| CliError::Runtime(e.to_string()))?;
    match out {
        Some(path) => write_output(path, &csv)?,
        None => std::io::stdout()
            .write_all(&csv)
            .map_err(|e| CliError::Runtime(format!("stdout: {e}")))?,
    }
    if let Some(path) = svg {
        write_output(path, curve_svg(&points).as_bytes())?;
    }
    Ok(())
}

pub fn render(scene: &Path, layout: Layout, format: Format, out: &Path) -> Result<(), CliError> {
    let file: StimulusFile = read_json(scene)?;
    let (rig, scene) = file.into_parts();
    let pair = render_stereo(&rig, &scene).map_err(|e| CliError::Invalid(e.to_string()))?;
    let presentation = match layout {
        Layout::SideBySide => Presentation::SideBySide,
        Layout::Anaglyph => Presentation::Anaglyph,
    };
    let format = match format {
        Format::Ppm => ImageFormat::Ppm,
        Format::Png => ImageFormat::Png,
    };
    let bytes = encode_image(&presentation.compose(&pair), format).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_output(out, &bytes)
}

pub fn simulate(config: Option<&Path>, true_m: f64, sigma: f64, seed: u64) -> Result<(), CliError> {
    let config: SessionConfig = match config {
        Some(path) => read_json(path)?,
        None => SessionConfig::default(),
    };
    let mut state = SessionState::new(config).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut observer = SimulatedObserver::new(true_m, sigma, seed).map_err(|e| CliError::Invalid(e.to_string()))?;
    let pse = run_closed_loop(&mut state, &mut observer).map_err(|e| CliError::Runtime(e.to_string()))?;
    print_json(&json!({
        "pse": round_sig9(pse),
        "trials": state.trials().len(),
        "reversals": state.reversals().iter().copied().map(round_sig9).collect::<Vec<_>>(),
        "final_step": round_sig9(state.step()),
        "clamp_events": state.clamp_events(),
    }))
}

pub fn survey_stats(csv: &Path) -> Result<(), CliError> {
    let counts = parse_survey_csv(read_input(csv)?.as_slice()).map_err(|e| CliError::Invalid(e.to_string()))?;
    let s = survey_proportions(counts).map_err(|e| CliError::Invalid(e.to_string()))?;
    print_json(&json!({
        "n": s.n,
        "n_closer": counts.n_closer,
        "n_farther": counts.n_farther,
        "proportion_closer": round_sig9(s.proportion_closer),
        "wilson_95_ci": [round_sig9(s.wilson_95_ci.0), round_sig9(s.wilson_95_ci.1)],
    }))
}

pub fn compare_models(context: &Path) -> Result<(), CliError> {
    let input: ComparisonInput = read_json(context)?;
    let report = input.evaluate().map_err(|e| CliError::Invalid(e.to_string()))?;
    print_json(&serde_json::to_value(report).map_err(|e| CliError::Runtime(e.to_string()))?)
}

pub fn serve(host: &str, port: u16, data_dir: PathBuf) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async move {
        let store = moondisp_service::Store::open(data_dir, None).map_err(|e| CliError::Runtime(e.to_string()))?;
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Runtime(format!("cannot listen on {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?;
        tracing::info!(%addr, "serving");
        moondisp_service::serve(listener, Arc::new(store), shutdown_signal())
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        tracing::info!("shut down");
        Ok(())
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
}
