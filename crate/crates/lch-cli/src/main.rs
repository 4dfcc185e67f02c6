//! `lch`: command-line front end for DGA construction, augmentations,
//! linearized homology, augmentation categories, bimodules and relative
//! Calabi-Yau certificates.
//!
//! Exit status: 0 when every check passes, 1 when a verification fails,
//! 2 on usage or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lch::ainfinity::{check_ainfty_relations, check_degrees, table, AugCategory, AugData, Category, Certificate};
use lch::augmentation::{enumerate_augmentations, linearized_cohomology, linearized_homology, Augmentation};
use lch::dga::CeDga;
use lch::diagram::{LagrangianDiagram, DEFAULT_REGION_CAP};
use lch::bimodule::morphism_table;
use lch::duality::{
    build_bimodules, build_weak_cy_certificate, check_bimodules, duality_les_check, verify_very_weak_cy, very_weak_data, TwoPositiveDisks,
};
use lch::f2linalg::Homology;

const SCHEMA: &str = "lch-report/1";

#[derive(Parser)]
#[command(name = "lch", version, about = "Legendrian contact homology over F2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// A `.diagram` or `.dga` file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Cap on face visits per disk during disk enumeration.
    #[arg(long, default_value_t = DEFAULT_REGION_CAP)]
    region_cap: usize,
    /// Face areas replacing the `areas:` section of a diagram.
    #[arg(long)]
    areas: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Plus,
    Minus,
    Circle,
}

#[derive(Subcommand)]
enum Command {
    /// Chekanov-Eliashberg DGA.
    Dga {
        #[command(subcommand)]
        action: DgaAction,
    },
    /// Augmentations.
    Aug {
        #[command(subcommand)]
        action: AugAction,
    },
    /// Linearized homology and cohomology at one augmentation.
    Lch {
        #[command(flatten)]
        common: Common,
        /// Augmentation number as listed by `aug list`.
        #[arg(long, default_value_t = 1)]
        aug: usize,
    },
    /// Augmentation categories.
    Augcat {
        #[command(subcommand)]
        action: AugcatAction,
    },
    /// Bimodules over `Aug₊`.
    Bimodule {
        #[command(subcommand)]
        action: BimoduleAction,
    },
    /// Relative Calabi-Yau structures.
    Cy {
        #[command(subcommand)]
        action: CyAction,
    },
}

#[derive(Subcommand)]
enum DgaAction {
    /// Print the DGA in `.dga` format.
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// Check grading, `∂² = 0`, link grading and, with areas, Stokes.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum AugAction {
    /// Every augmentation with its values on degree-zero chords
    List {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum AugcatAction {
    /// TSV of the nonzero structure maps up to order `k`.
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Variant::Plus)]
        variant: Variant,
    },
    /// A∞ relations and degree law up to order `k`.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
}

#[derive(Subcommand)]
enum BimoduleAction {
    /// Relations, unitality and identifications of `M₊`, `M₋`, `N`.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

#[derive(Subcommand)]
enum CyAction {
    /// The very weak structure on `ρ` and the duality exact sequence.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// The weak right relative structure on `Aug₊ → C`, as a certificate.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Nonzero components of one structure map up to `p + q ≤ k`.
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        map: MapName,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MapName {
    /// `ρ: N[−1] → M₋`.
    Rho,
    /// `ρ∨: M₋∨ → N∨[1]`.
    RhoDual,
    /// `θ: N∨[−1] → N`.
    Theta,
    /// `H: M₋∨[−2] → N`.
    H,
    /// `η: M₋∨[−2] → M₊`.
    Eta,
    /// `π_N η: M₋∨[−2] → N`.
    PiNEta,
}

/// Collected output: text lines, JSON records and the overall verdict.
struct Report {
    command: &'static str,
    format: Format,
    lines: Vec<String>,
    records: Vec<Value>,
    passed: bool,
}

impl Report {
    fn new(command: &'static str, format: Format) -> Self {
        Report { command, format, lines: Vec::new(), records: Vec::new(), passed: true }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn record(&mut self, kind: &str, mut v: Value) {
        if let Value::Object(m) = &mut v {
            m.insert("schema".into(), json!(SCHEMA));
            m.insert("command".into(), json!(self.command));
            m.insert("record".into(), json!(kind));
        }
        self.records.push(v);
    }

    fn certificate(&mut self, c: &Certificate) {
        self.passed &= c.passed();
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        self.line(format!("{verdict}\t{}\tK={}\ttuples={}", c.check, c.k, c.tuples));
        for f in &c.failures {
            self.line(format!("\t{f}"));
        }
        self.record("check", serde_json::to_value(c).expect("certificates serialize"));
    }

    fn emit(self) -> ExitCode {
        match self.format {
            Format::Text => {
                for l in &self.lines {
                    println!("{l}");
                }
            }
            Format::Json => {
                for r in &self.records {
                    println!("{r}");
                }
            }
        }
        if self.passed {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

enum Input {
    Diagram(LagrangianDiagram),
    Dga(CeDga),
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Replaces the `areas:` section of a diagram with the lines of `areas`.
fn with_areas(text: &str, areas: &str) -> String {
    let mut out = String::new();
    let mut skipping = false;
    for line in text.lines() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body == "areas:" {
            skipping = true;
            continue;
        }
        if skipping && body.ends_with(':') && !body.contains('=') {
            skipping = false;
        }
        if !skipping {
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str("areas:\n");
    for line in areas.lines() {
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() && body != "areas:" {
            out.push_str("  ");
            out.push_str(body);
            out.push('\n');
        }
    }
    out
}

fn load(c: &Common) -> Result<Input> {
    let text = read(&c.input)?;
    let is_dga = c.input.extension().is_some_and(|e| e == "dga") || text.lines().any(|l| l.trim() == "generators:");
    if is_dga {
        if c.areas.is_some() {
            bail!("--areas applies to diagram input only");
        }
        let g = CeDga::parse(&text).with_context(|| format!("parsing {}", c.input.display()))?;
        return Ok(Input::Dga(g));
    }
    let text = match &c.areas {
        Some(p) => with_areas(&text, &read(p)?),
        None => text,
    };
    let d = LagrangianDiagram::parse(&text).with_context(|| format!("parsing {}", c.input.display()))?;
    Ok(Input::Diagram(d))
}

fn dga_of(c: &Common, input: &Input) -> Result<CeDga> {
    Ok(match input {
        Input::Dga(g) => g.clone(),
        Input::Diagram(d) => CeDga::from_diagram(d, c.region_cap)?,
    })
}

fn load_dga(c: &Common) -> Result<CeDga> {
    dga_of(c, &load(c)?)
}

fn load_diagram(c: &Common) -> Result<LagrangianDiagram> {
    match load(c)? {
        Input::Diagram(d) => Ok(d),
        Input::Dga(_) => bail!("this command needs a .diagram input (two-positive disks are read from the diagram)"),
    }
}

fn augmentations(g: &CeDga) -> Result<Vec<Augmentation>> {
    let augs = enumerate_augmentations(g)?;
    if augs.is_empty() {
        bail!("the DGA has no augmentations");
    }
    Ok(augs)
}

fn dga_build(c: &Common) -> Result<Report> {
    let g = load_dga(c)?;
    let mut r = Report::new("dga build", c.format);
    for l in g.serialize().lines() {
        r.line(l);
    }
    let gens: Vec<Value> = g.chords.iter().map(|x| json!({ "label": x.label, "grading": x.grading })).collect();
    r.record("dga", json!({ "rotation": g.rotation, "generators": gens, "base_points": g.base_points, "differential": g.table() }));
    Ok(r)
}

fn dga_check(c: &Common) -> Result<Report> {
    let input = load(c)?;
    let g = dga_of(c, &input)?;
    let mut r = Report::new("dga check", c.format);
    let mut reports = vec![g.check_degree(), g.check_d_squared(), g.check_link_grading()];
    if let Input::Diagram(d) = &input {
        if let Some(h) = d.heights() {
            match h.into_iter().collect::<Option<Vec<_>>>() {
                Some(h) => reports.push(g.check_stokes(&h)),
                None => r.line("SKIP\tstokes\tsome chord heights are not determined by the areas"),
            }
        }
    }
    for rep in reports {
        r.passed &= rep.passed();
        let verdict = if rep.passed() { "PASS" } else { "FAIL" };
        r.line(format!("{verdict}\t{}\tgenerators={}", rep.check, rep.checked));
        for f in &rep.failures {
            r.line(format!("\t{}: {}", f.generator, f.detail));
        }
        r.record("check", serde_json::to_value(&rep)?);
    }
    Ok(r)
}

fn aug_list(c: &Common) -> Result<Report> {
    let g = load_dga(c)?;
    let augs = enumerate_augmentations(&g)?;
    let mut r = Report::new("aug list", c.format);
    for (i, a) in augs.iter().enumerate() {
        r.line(format!("ε{}\t{}", i + 1, a.format(&g)));
        let values: serde_json::Map<String, Value> = g
            .chords
            .iter()
            .zip(&a.values)
            .filter(|(x, _)| x.grading == 0)
            .map(|(x, &v)| (x.label.clone(), json!(u8::from(v))))
            .collect();
        r.record("augmentation", json!({ "index": i + 1, "values": values }));
    }
    Ok(r)
}

fn homology_rows(r: &mut Report, name: &str, h: &Homology, labels: &dyn Fn(usize) -> String) -> Value {
    let mut groups = Vec::new();
    for (deg, grp) in &h.groups {
        if grp.dim() == 0 {
            continue;
        }
        let reps: Vec<String> = grp
            .reps
            .iter()
            .map(|v| {
                let terms: Vec<String> = v.ones().map(labels).collect();
                format!("[{}]", terms.join("+"))
            })
            .collect();
        r.line(format!("{name}\t{deg}\t{}\t{}", grp.dim(), reps.join(" ")));
        groups.push(json!({ "degree": deg, "dim": grp.dim(), "generators": reps }));
    }
    json!(groups)
}

fn lch(c: &Common, aug: usize) -> Result<Report> {
    let g = load_dga(c)?;
    let augs = augmentations(&g)?;
    let Some(eps) = aug.checked_sub(1).and_then(|i| augs.get(i)) else {
        bail!("--aug {aug} out of range: there are {} augmentations", augs.len());
    };
    let mut r = Report::new("lch", c.format);
    r.line(format!("augmentation\tε{aug}\t{}", eps.format(&g)));
    r.line("group\tdegree\tdim\tgenerators");
    let hom = linearized_homology(&g, eps)?;
    let co = linearized_cohomology(&g, eps)?;
    let labels = |i: usize| g.chords[i].label.clone();
    let co_labels = |i: usize| format!("{}*", g.chords[i].label);
    let h = homology_rows(&mut r, "LCH", &hom, &labels);
    let ch = homology_rows(&mut r, "LCH^", &co, &co_labels);
    r.record("lch", json!({ "augmentation": aug, "homology": h, "cohomology": ch }));
    Ok(r)
}

fn category(g: &CeDga, variant: Variant) -> Result<Box<dyn Category>> {
    let data = Arc::new(AugData::new(g, augmentations(g)?));
    Ok(Box::new(match variant {
        Variant::Plus => AugCategory::plus(data),
        Variant::Minus => AugCategory::minus(data),
        Variant::Circle => AugCategory::circle(data),
    }))
}

fn augcat_table(c: &Common, k: usize, variant: Variant) -> Result<Report> {
    let g = load_dga(c)?;
    let cat = category(&g, variant)?;
    let mut r = Report::new("augcat table", c.format);
    for e in table(cat.as_ref(), k) {
        r.line(e.display());
        r.record("entry", serde_json::to_value(&e)?);
    }
    Ok(r)
}

fn augcat_check(c: &Common, k: usize) -> Result<Report> {
    let g = load_dga(c)?;
    let mut r = Report::new("augcat check", c.format);
    for (name, v) in [("plus", Variant::Plus), ("minus", Variant::Minus), ("circle", Variant::Circle)] {
        let cat = category(&g, v)?;
        for mut cert in [check_ainfty_relations(cat.as_ref(), k), check_degrees(cat.as_ref(), k)] {
            cert.check = format!("{name}_{}", cert.check);
            r.certificate(&cert);
        }
    }
    Ok(r)
}

fn bimodule_check(c: &Common, k: usize) -> Result<Report> {
    let g = load_dga(c)?;
    let set = build_bimodules(&g, augmentations(&g)?);
    let mut r = Report::new("bimodule check", c.format);
    for cert in check_bimodules(&set, k) {
        r.certificate(&cert);
    }
    Ok(r)
}

fn cy_verify(c: &Common, k: usize) -> Result<Report> {
    let d = load_diagram(c)?;
    let g = CeDga::from_diagram(&d, c.region_cap)?;
    let augs = augmentations(&g)?;
    let set = build_bimodules(&g, augs.clone());
    let disks = TwoPositiveDisks::enumerate(&d, c.region_cap)?;
    let mut r = Report::new("cy verify", c.format);
    let cert = verify_very_weak_cy(&set, &d, &disks, k);
    for check in &cert.checks {
        r.certificate(check);
    }
    for e in 0..augs.len() {
        let les = duality_les_check(&g, &augs, e)?;
        let cert = Certificate { check: format!("duality_les_ε{}", e + 1), k: 0, tuples: 1, failures: les.failures.clone() };
        r.certificate(&cert);
    }
    r.line(format!("{}\tcorpus {}", if r.passed { "PASS" } else { "FAIL" }, cert.corpus_hash));
    Ok(r)
}

fn cy_certify(c: &Common, k: usize) -> Result<Report> {
    let d = load_diagram(c)?;
    let g = CeDga::from_diagram(&d, c.region_cap)?;
    let set = build_bimodules(&g, augmentations(&g)?);
    let disks = TwoPositiveDisks::enumerate(&d, c.region_cap)?;
    let cert = build_weak_cy_certificate(&set, &d, &disks, k)?;
    let mut r = Report::new("cy certify", c.format);
    for check in &cert.checks {
        r.certificate(check);
    }
    r.line(format!("{}\tcorpus {}", if cert.passed() { "PASS" } else { "FAIL" }, cert.corpus_hash));
    r.record("certificate", serde_json::to_value(&cert)?);
    Ok(r)
}

fn cy_table(c: &Common, map: MapName, k: usize) -> Result<Report> {
    let d = load_diagram(c)?;
    let g = CeDga::from_diagram(&d, c.region_cap)?;
    let set = build_bimodules(&g, augmentations(&g)?);
    let disks = TwoPositiveDisks::enumerate(&d, c.region_cap)?;
    let v = very_weak_data(&set, &disks);
    let f = match map {
        MapName::Rho => v.rho,
        MapName::RhoDual => v.rho_dual.dual,
        MapName::Theta => v.theta,
        MapName::H => v.h,
        MapName::Eta => v.eta,
        MapName::PiNEta => v.pi_n_eta,
    };
    let mut r = Report::new("cy table", c.format);
    for l in morphism_table(set.cat.as_ref(), f.as_ref(), k) {
        let (input, output) = l.split_once('\t').expect("tab-separated entry");
        r.record("entry", json!({ "input": input, "output": output }));
        r.line(l);
    }
    Ok(r)
}

fn run(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Dga { action: DgaAction::Build { common } } => dga_build(&common),
        Command::Dga { action: DgaAction::Check { common } } => dga_check(&common),
        Command::Aug { action: AugAction::List { common } } => aug_list(&common),
        Command::Lch { common, aug } => lch(&common, aug),
        Command::Augcat { action: AugcatAction::Table { common, k, variant } } => augcat_table(&common, k, variant),
        Command::Augcat { action: AugcatAction::Check { common, k } } => augcat_check(&common, k),
        Command::Bimodule { action: BimoduleAction::Check { common, k } } => bimodule_check(&common, k),
        Command::Cy { action: CyAction::Verify { common, k } } => cy_verify(&common, k),
        Command::Cy { action: CyAction::Certify { common, k } } => cy_certify(&common, k),
        Command::Cy { action: CyAction::Table { common, map, k } } => cy_table(&common, map, k),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli) {
        Ok(report) => {
            let code = report.emit();
            if std::env::var_os("LCH_TIMING").is_some() {
                eprintln!("elapsed {:?}", start.elapsed());
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
