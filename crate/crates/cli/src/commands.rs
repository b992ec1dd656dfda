use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use phylon::fixtures::{self, FixtureShape};
use phylon::json::{
    InvariantJson, LambdaJson, PhylonMapJson, ProblemInstance, QuadratureReportJson, VerdictJson, WitnessJson,
};
use phylon::normalization::morse_normalize_approx;
use phylon::quadrature::Radius;
use phylon::series::standard_quadratic;
use phylon::{
    compare_expansion, decide_equivalence, decide_equivalence_1d, invariant_sequence, lambda_1d, lambda_reduced,
    morse_normalize, rational, EquivalenceVerdict, PairInstance, PhylonMap, QuadratureConfig,
};

use crate::args::{Command, RadiusArg};
use crate::error::{CliError, Result};
use crate::Status;

const PRECISION_ENV: &str = "PHYLON_PRECISION_BITS";
const DEFAULT_BITS: u32 = 64;

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Invariants { instance, orders, reduced } => invariants(&instance, orders, reduced),
        Command::Equiv { a, b, degree, witness } => {
            let (a, b) = (load_pair(&a)?, load_pair(&b)?);
            verdict(decide_equivalence(&a, &b, degree)?, witness.as_deref())
        }
        Command::Equiv1d { a, b, degree, witness } => {
            let (a, b) = (load_pair(&a)?, load_pair(&b)?);
            verdict(decide_equivalence_1d(&a, &b, degree)?, witness.as_deref())
        }
        Command::Morse { instance, approx, bits } => morse(&instance, approx, bits),
        Command::Lambda1d { instance, orders } => {
            let pair = load_pair(&instance)?;
            emit(&LambdaJson::from_sequence(&lambda_1d(&pair, orders)?))
        }
        Command::Verify { instance, n, orders, points, radius } => {
            let pair = load_pair(&instance)?;
            let radius = match radius {
                RadiusArg::Auto => Radius::Auto,
                RadiusArg::Fixed(r) => Radius::Fixed(r),
            };
            let cfg = QuadratureConfig { points, radius, ..QuadratureConfig::default() };
            let report = compare_expansion(&pair, orders, &n, &cfg)?;
            emit(&QuadratureReportJson::from_report(&report))
        }
        Command::Act { instance, psi, seed, emit_psi } => act(&instance, psi.as_deref(), seed, emit_psi.as_deref()),
    }
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}

fn write<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.into(), source })
}

/// Prints to stdout; a closed pipe (`| head`) is not an error.
fn emit<T: Serialize>(value: &T) -> Result<Status> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io { path: "<stdout>".into(), source: e }),
        _ => Ok(Status::Ok),
    }
}

fn load_pair(path: &Path) -> Result<PairInstance> {
    Ok(read::<ProblemInstance>(path)?.pair()?)
}

fn invariants(path: &Path, orders: usize, reduced: bool) -> Result<Status> {
    let pair = load_pair(path)?;
    let values = if reduced {
        if pair.f != standard_quadratic(pair.dim(), pair.f.trunc()) {
            return Err(CliError::Usage("--reduced needs f = x·x".into()));
        }
        (0..=orders).map(|i| lambda_reduced(&pair.b, i)).collect::<phylon::Result<Vec<_>>>()?
    } else {
        invariant_sequence(&pair, orders)?.values
    };
    emit(&values.iter().map(InvariantJson::from_invariant).collect::<Vec<_>>())
}

fn verdict(v: EquivalenceVerdict, witness_path: Option<&Path>) -> Result<Status> {
    if let (Some(path), Some(w)) = (witness_path, &v.witness) {
        write(path, &WitnessJson::from_witness(w))?;
    }
    emit(&VerdictJson::from_verdict(&v))?;
    Ok(if v.equivalent { Status::Ok } else { Status::NotEquivalent })
}

fn precision_bits(flag: Option<u32>) -> Result<u32> {
    if let Some(bits) = flag {
        return Ok(bits);
    }
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{PRECISION_ENV}={v} is not a bit count"))),
        Err(_) => Ok(DEFAULT_BITS),
    }
}

#[derive(Serialize)]
struct ApproxMorseJson {
    bits: u32,
    residual: String,
    map: PhylonMapJson,
}

fn morse(path: &Path, approx: bool, bits: Option<u32>) -> Result<Status> {
    let pair = load_pair(path)?;
    if !approx {
        return emit(&PhylonMapJson::from_map(&morse_normalize(&pair.f)?));
    }
    let bits = precision_bits(bits)?;
    let result = morse_normalize_approx(&pair.f, bits)?;
    emit(&ApproxMorseJson {
        bits,
        residual: rational::format(&result.residual),
        map: PhylonMapJson::from_map(&result.map),
    })
}

fn act(path: &Path, psi_path: Option<&Path>, seed: Option<u64>, emit_psi: Option<&Path>) -> Result<Status> {
    let instance: ProblemInstance = read(path)?;
    let pair = instance.pair()?;
    let psi: PhylonMap = match (psi_path, seed) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --psi or --seed, not both".into())),
        (Some(p), None) => read::<PhylonMapJson>(p)?.to_map()?,
        (None, Some(s)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            fixtures::random_phylon(&mut rng, &FixtureShape::new(pair.dim(), pair.f.trunc()))
        }
        (None, None) => instance
            .psi()?
            .ok_or_else(|| CliError::Usage("no map: pass --psi, --seed, or include \"psi\" in the instance".into()))?,
    };
    if let Some(p) = emit_psi {
        write(p, &PhylonMapJson::from_map(&psi))?;
    }
    emit(&ProblemInstance::from_pair(&psi.act_on_pair(&pair)?, None))
}
