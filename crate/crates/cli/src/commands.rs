use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::CommandFactory;
use serde::Serialize;

use povmforge_core::decompose::{audit_paper_product, paper_factorization};
use povmforge_core::dilation::{
    audit_dilation_with, build_oracle_dilation, transcribe_paper_matrix, AuditConfig, DIM,
};
use povmforge_core::matkernel::{matrix_to_pairs, CVector};
use povmforge_core::pipeline::{decompose_audit, povm_audit, synth_audit, Tolerances, VerifyConfig};
use povmforge_core::povm::{build_povm, build_states, outcome_probabilities, PovmParams, QChoice};
use povmforge_core::report::{emit_report, AuditReport, ReportFormat};
use povmforge_core::sim::{PovmSampler, SamplingRoute, Statevector};
use povmforge_core::synth::{compile_dilation, CompileSource};
use povmforge_core::{verify, DilationSource, ProductOrder};

use crate::args::{Cli, Command, Common, FactorSource, Format, Order, Route};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_AUDIT_FAILURE: u8 = 1;

/// Reports a usage problem found after parsing and exits with status 2.
fn usage(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::InvalidValue, msg).exit()
}

fn params(common: &Common) -> Result<PovmParams> {
    let p = &common.params;
    let q = match p.q.as_str() {
        "auto" => QChoice::Optimal,
        text => match text.parse::<f64>() {
            Ok(v) => QChoice::Explicit(v),
            Err(_) => usage(format!("--q expects `auto` or a number, got `{text}`")),
        },
    };
    let built = match (&p.inv_sq, p.alpha, p.beta, p.gamma, p.delta) {
        (Some(v), ..) => {
            let Ok(inv_sq) = <[f64; 4]>::try_from(v.as_slice()) else {
                usage(format!("--inv-sq needs exactly 4 values, got {}", v.len()));
            };
            PovmParams::from_inverse_squares(inv_sq, q)
        }
        (None, Some(a), Some(b), Some(g), Some(d)) => PovmParams::with_q([a, b, g, d], q),
        _ => usage("give either --inv-sq a,b,c,d or all of --alpha --beta --gamma --delta"),
    };
    built.context("invalid POVM parameters")
}

fn tolerances(common: &Common) -> Tolerances {
    match common.tolerance {
        Some(t) if !(t >= 0.0) => usage(format!("--tolerance must be non-negative, got {t}")),
        Some(t) => Tolerances::uniform(t),
        None => Tolerances::default(),
    }
}

fn require_format(common: &Common, allowed: &[Format], command: &str) {
    if !allowed.contains(&common.format) {
        usage(format!("`{command}` does not support --format {:?}", common.format).to_lowercase());
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("output serializes");
    s.push('\n');
    s
}

/// Sends the report to `--report` as JSON, or to stderr as text.
fn deliver_report(common: &Common, report: &AuditReport) -> Result<()> {
    match &common.report {
        Some(path) => write_out(Some(path), &(emit_report(report, ReportFormat::Json) + "\n")),
        None => {
            eprint!("{}", emit_report(report, ReportFormat::Text));
            Ok(())
        }
    }
}

fn status(report: &AuditReport) -> u8 {
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_AUDIT_FAILURE
    }
}

fn audit_config(common: &Common, tolerance: f64) -> AuditConfig {
    AuditConfig {
        tolerance,
        seed: common.seed,
        ..AuditConfig::default()
    }
}

#[derive(Serialize)]
struct PovmOutput<'a> {
    #[serde(flatten)]
    povm: &'a povmforge_core::PovmSet,
    eigenvalues: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct MatrixOutput {
    source: DilationSource,
    params: PovmParams,
    matrix: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tags: Option<Vec<Vec<String>>>,
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Povm(common) => {
            require_format(&common, &[Format::Json], "povm");
            let params = params(&common)?;
            let tol = tolerances(&common);
            let povm = build_povm(&params);
            let report = povm_audit(&povm, tol.povm)?;
            let eigenvalues = povm.spectra()?.into_iter().collect();
            write_out(common.output.as_deref(), &json(&PovmOutput { povm: &povm, eigenvalues }))?;
            deliver_report(&common, &report)?;
            Ok(status(&report))
        }
        Command::Dilate(common) => {
            require_format(&common, &[Format::Json], "dilate");
            let params = params(&common)?;
            let tol = tolerances(&common);
            let oracle = build_oracle_dilation(&params)?;
            let povm = build_povm(&params);
            let report = audit_dilation_with(&oracle, &oracle, &povm, &audit_config(&common, tol.dilation))?;
            let out = MatrixOutput {
                source: oracle.source,
                params,
                matrix: matrix_to_pairs(&oracle.matrix),
                tags: None,
            };
            write_out(common.output.as_deref(), &json(&out))?;
            deliver_report(&common, &report)?;
            Ok(status(&report))
        }
        Command::PaperMatrix { common, strict } => {
            require_format(&common, &[Format::Json], "paper-matrix");
            let params = params(&common)?;
            let tol = tolerances(&common);
            let oracle = build_oracle_dilation(&params)?;
            let paper = transcribe_paper_matrix(&params);
            let report = audit_dilation_with(
                &paper,
                &oracle,
                &build_povm(&params),
                &audit_config(&common, tol.dilation),
            )?;
            let tags = paper.tags.as_ref().map(|t| {
                t.chunks(DIM)
                    .map(|row| row.iter().map(|tag| tag.to_string()).collect())
                    .collect()
            });
            let out = MatrixOutput {
                source: paper.source,
                params,
                matrix: matrix_to_pairs(&paper.matrix),
                tags,
            };
            write_out(common.output.as_deref(), &json(&out))?;
            deliver_report(&common, &report)?;
            Ok(if strict { status(&report) } else { EXIT_PASS })
        }
        Command::Decompose { common, source, order, strict } => {
            require_format(&common, &[Format::Json], "decompose");
            let params = params(&common)?;
            let tol = tolerances(&common);
            let (seq, report, gated) = match source {
                FactorSource::Generic => {
                    if order != Order::LeftFirst {
                        usage("--order applies to --source paper only");
                    }
                    let oracle = build_oracle_dilation(&params)?;
                    let (seq, report) = decompose_audit(&oracle, tol.decompose)?;
                    (seq, report, true)
                }
                FactorSource::Paper => {
                    let order = match order {
                        Order::LeftFirst => ProductOrder::LeftFirst,
                        Order::Reversed => ProductOrder::Reversed,
                    };
                    let seq = paper_factorization(&params).with_convention(order);
                    let report = audit_paper_product(&params, &audit_config(&common, tol.dilation))?;
                    (seq, report, strict)
                }
            };
            write_out(common.output.as_deref(), &json(&seq))?;
            deliver_report(&common, &report)?;
            Ok(if gated { status(&report) } else { EXIT_PASS })
        }
        Command::Synth { common, source } => {
            require_format(&common, &[Format::Json, Format::Qasm], "synth");
            let params = params(&common)?;
            let config = VerifyConfig {
                tolerances: tolerances(&common),
                seed: common.seed,
                ..VerifyConfig::default()
            };
            let source = match source {
                FactorSource::Generic => CompileSource::Oracle,
                FactorSource::Paper => CompileSource::PaperProduct,
            };
            let compiled = compile_dilation(&params, source)?;
            let mut report = synth_audit(&compiled, &build_povm(&params), &config)?;
            let counts = compiled.circuit.counts();
            report.note(format!(
                "source {}: {} gates ({} single, {} cnot)",
                source.as_str(),
                compiled.circuit.gates.len(),
                counts.single,
                counts.cnot
            ));
            let text = match common.format {
                Format::Qasm => compiled.circuit.to_qasm(),
                _ => json(&compiled.circuit),
            };
            write_out(common.output.as_deref(), &text)?;
            deliver_report(&common, &report)?;
            Ok(status(&report))
        }
        Command::Simulate { common, input, shots, route } => {
            require_format(&common, &[Format::Json], "simulate");
            let params = params(&common)?;
            let state = input_state(&params, &input);
            let route = match route {
                Route::Matrix => SamplingRoute::Matrix,
                Route::Circuit => SamplingRoute::Circuit,
            };
            let sampler = PovmSampler::new(&params, route)?;
            let input = Statevector::from_vector(2, &state)?;
            let hist = sampler.sample(&input, shots, common.seed)?;
            let mut report = AuditReport::new();
            let (chi2, df) = hist.chi_squared();
            let critical = povmforge_core::pipeline::CHI2_CRITICAL_999[df.clamp(1, 4) - 1];
            report.check("chi_squared", chi2, common.tolerance.unwrap_or(critical));
            let expected = outcome_probabilities(&build_povm(&params), &state)?;
            report.note(format!("expected probabilities {:?}", expected.probs));
            write_out(common.output.as_deref(), &json(&hist))?;
            deliver_report(&common, &report)?;
            Ok(status(&report))
        }
        Command::Verify { common, shots } => {
            require_format(&common, &[Format::Json, Format::Text], "verify");
            let params = params(&common)?;
            let config = VerifyConfig {
                tolerances: tolerances(&common),
                seed: common.seed,
                shots,
                ..VerifyConfig::default()
            };
            let report = verify(&params, &config)?;
            let text = match common.format {
                Format::Text => emit_report(&report, ReportFormat::Text),
                _ => emit_report(&report, ReportFormat::Json) + "\n",
            };
            write_out(common.output.as_deref(), &text)?;
            if let Some(path) = &common.report {
                write_out(Some(path), &(emit_report(&report, ReportFormat::Json) + "\n"))?;
            }
            Ok(status(&report))
        }
    }
}

fn input_state(params: &PovmParams, name: &str) -> CVector {
    match name {
        "00" | "01" | "10" | "11" => {
            let k = usize::from_str_radix(name, 2).expect("two binary digits");
            CVector::basis(4, k)
        }
        "psi1" | "psi2" | "psi3" | "psi4" => {
            let k = name[3..].parse::<usize>().expect("digit") - 1;
            build_states(params)[k].normalized()
        }
        other => usage(format!("--input expects 00, 01, 10, 11 or psi1..psi4, got `{other}`")),
    }
}
