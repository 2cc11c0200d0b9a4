use kpe_core::families::{element_oracle, make_state, Family, FamilyOracle, FamilySpec};
use kpe_core::qstate::{DensityMatrix, PureState, QuantumState};

use crate::args::{FamilyArgs, FamilyKind, Source};
use crate::{CliError, CliResult};

pub fn family_spec(args: &FamilyArgs) -> CliResult<FamilySpec> {
    let kind = args.family.ok_or_else(|| CliError::Usage("either --state or --family is required".into()))?;
    let bits = match (&args.bits, kind) {
        (Some(b), FamilyKind::Product) => Some(parse_bits(b)?),
        (Some(_), _) => return Err(CliError::Usage("--bits only applies to --family product".into())),
        (None, FamilyKind::Product) => None,
        (None, _) => None,
    };
    let n = match (args.n, &bits) {
        (Some(n), Some(b)) if n != b.len() => {
            return Err(CliError::Usage(format!("--n {n} does not match {} bits", b.len())))
        }
        (Some(n), _) => n,
        (None, Some(b)) => b.len(),
        (None, None) => return Err(CliError::Usage("--n is required with --family".into())),
    };
    let p = args.p.ok_or_else(|| CliError::Usage("--p is required with --family".into()))?;
    let family = match kind {
        FamilyKind::Ghz => Family::Ghz,
        FamilyKind::W => Family::W,
        FamilyKind::Dicke => Family::Dicke {
            excitations: args
                .excitations
                .ok_or_else(|| CliError::Usage("--excitations is required with --family dicke".into()))?,
        },
        FamilyKind::Product => Family::Product { bits: bits.unwrap_or_else(|| vec![0; n]) },
    };
    if args.excitations.is_some() && kind != FamilyKind::Dicke {
        return Err(CliError::Usage("--excitations only applies to --family dicke".into()));
    }
    Ok(FamilySpec::new(family, n, p)?)
}

fn parse_bits(s: &str) -> CliResult<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(CliError::Usage(format!("--bits must contain only 0 and 1, found {other:?}"))),
        })
        .collect()
}

/// A state as a detector input.
pub enum Loaded {
    Pure(PureState),
    Dense(DensityMatrix),
    Oracle(FamilyOracle),
}

impl Loaded {
    pub fn n_qubits(&self) -> usize {
        match self {
            Loaded::Pure(p) => p.n_qubits(),
            Loaded::Dense(d) => d.n_qubits(),
            Loaded::Oracle(o) => o.spec().n,
        }
    }
}

pub struct Input {
    pub label: String,
    pub state: Loaded,
}

fn describe(spec: &FamilySpec) -> String {
    format!("{} n={} p={}", spec.family, spec.n, spec.p)
}

/// Loads a state with an explicit representation: family members become a
/// pure vector when noiseless and a dense matrix otherwise.
pub fn load_explicit(src: &Source) -> CliResult<Input> {
    if let Some(path) = &src.state {
        let state = match QuantumState::read(path)? {
            QuantumState::Pure(p) => Loaded::Pure(p),
            QuantumState::Density(d) => Loaded::Dense(d),
        };
        return Ok(Input { label: path.display().to_string(), state });
    }
    let spec = family_spec(&src.family)?;
    let state =
        if spec.is_pure() { Loaded::Pure(spec.target_state()?) } else { Loaded::Dense(make_state(&spec)?) };
    Ok(Input { label: describe(&spec), state })
}

/// Loads a state for element-wise access only; family members use the
/// closed-form element oracle and are never materialized.
pub fn load_accessor(src: &Source) -> CliResult<Input> {
    if src.state.is_some() {
        return load_explicit(src);
    }
    let spec = family_spec(&src.family)?;
    Ok(Input { label: describe(&spec), state: Loaded::Oracle(element_oracle(&spec)?) })
}

pub fn to_density(state: &Loaded) -> CliResult<DensityMatrix> {
    match state {
        Loaded::Pure(p) => Ok(p.to_density()?),
        Loaded::Dense(d) => Ok(d.clone()),
        Loaded::Oracle(o) => Ok(make_state(o.spec())?),
    }
}
