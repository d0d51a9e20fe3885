//! Export of the per-instance semidefinite feasibility data.
//!
//! With rank-relaxed precoder Grams `F_k = f_k f_k^H`, the SINR floor and
//! power constraints become linear in `F_k`:
//!
//! - `tr(D_k F_k) - gamma * sum_{j != k} tr(D_k F_j) >= gamma * zeta_k(q)`
//!   with the rank-one sensing matrix `D_k = a_k a_k^H`, `a_k` the quantized
//!   estimate seen through user `k`'s combiner,
//! - `sum_k tr(S_l F_k) <= p_max` with `S_l` the diagonal selector of AP
//!   `l`'s antennas,
//! - `zeta_k(q) = q * jam_k + bounds_k + noise`, split into its pieces so a
//!   consumer can sweep `q` without re-exporting.
//!
//! The on-disk format is plain text with floats printed in Rust's shortest
//! round-trip representation, so write-then-read reproduces every value
//! bit for bit.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::priors::PriorSet;

/// Everything a semidefinite feasibility solver needs for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SdrExport {
    pub aps: usize,
    pub ues: usize,
    pub jammers: usize,
    pub ap_antennas: usize,
    pub ue_antennas: usize,
    pub p_max_watts: f64,
    pub sinr_threshold: f64,
    pub noise_watts: f64,
    /// Rank-one sensing matrices, one per user, `(aps * ap_antennas)` square.
    pub d: Vec<CMat>,
    /// Per-user jamming coupling per watt through the fixed combiner.
    pub zeta_jam_per_watt: Vec<f64>,
    /// Per-user estimation-plus-quantization power bound.
    pub zeta_bounds: Vec<f64>,
    /// Diagonal of each AP's antenna selector over the stacked dimension.
    pub ap_masks: Vec<Vec<u8>>,
}

impl SdrExport {
    /// Stacked dimension of the precoder space.
    pub fn dim(&self) -> usize {
        self.aps * self.ap_antennas
    }

    /// Constant denominator term of user `k` at jamming power `q`.
    pub fn zeta(&self, k: usize, q_watts: f64) -> f64 {
        q_watts * self.zeta_jam_per_watt[k] + self.zeta_bounds[k] + self.noise_watts
    }

    /// Evaluate user `k`'s SINR bound at rank-one Grams built from the given
    /// precoders (consistency hook for tests and consumers).
    pub fn sinr_at(&self, precoders: &[CVec], k: usize, q_watts: f64) -> f64 {
        let quad = |f: &CVec| -> f64 { f.dotc(&(&self.d[k] * f)).re };
        let num = quad(&precoders[k]);
        let mut den = self.zeta(k, q_watts);
        for (j, f) in precoders.iter().enumerate() {
            if j != k {
                den += quad(f);
            }
        }
        num / den
    }
}

/// Assemble the export from a prior set and fixed combiners.
pub fn build_sdr_export(priors: &PriorSet, combiners: &[CVec]) -> SdrExport {
    let dim = priors.aps * priors.ap_antennas;
    let mut d = Vec::with_capacity(priors.ues);
    let mut zeta_jam = Vec::with_capacity(priors.ues);
    let mut zeta_bounds = Vec::with_capacity(priors.ues);
    for k in 0..priors.ues {
        let a = priors.hbar_stacked(k).adjoint() * &combiners[k];
        d.push(&a * a.adjoint());
        zeta_jam.push(priors.jam_quad(k, &combiners[k]));
        zeta_bounds.push((priors.en_ub(k) + priors.qe_ub(k)) * combiners[k].norm_squared());
    }
    let ap_masks = (0..priors.aps)
        .map(|l| {
            (0..dim)
                .map(|i| u8::from(i / priors.ap_antennas == l))
                .collect()
        })
        .collect();
    SdrExport {
        aps: priors.aps,
        ues: priors.ues,
        jammers: priors.jammers,
        ap_antennas: priors.ap_antennas,
        ue_antennas: priors.ue_antennas,
        p_max_watts: priors.p_max_watts,
        sinr_threshold: priors.sinr_threshold,
        noise_watts: priors.noise_watts,
        d,
        zeta_jam_per_watt: zeta_jam,
        zeta_bounds,
        ap_masks,
    }
}

fn require_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} is not finite: {x}")))
    }
}

/// Serialize the export. Floats use the shortest representation that parses
/// back to the identical bits.
pub fn write_sdr<W: Write>(e: &SdrExport, out: &mut W) -> Result<()> {
    for (k, m) in e.d.iter().enumerate() {
        if m.shape() != (e.dim(), e.dim()) {
            return Err(Error::Dimension(format!(
                "sensing matrix {k} has shape {:?}, expected {dim} x {dim}",
                m.shape(),
                dim = e.dim(),
            )));
        }
    }
    writeln!(out, "sdr-export v1")?;
    writeln!(
        out,
        "dims aps={} ues={} jammers={} ap_antennas={} ue_antennas={}",
        e.aps, e.ues, e.jammers, e.ap_antennas, e.ue_antennas
    )?;
    require_finite(e.p_max_watts, "p_max")?;
    require_finite(e.sinr_threshold, "gamma")?;
    require_finite(e.noise_watts, "noise")?;
    writeln!(out, "p_max {:?}", e.p_max_watts)?;
    writeln!(out, "gamma {:?}", e.sinr_threshold)?;
    writeln!(out, "noise {:?}", e.noise_watts)?;
    for k in 0..e.ues {
        writeln!(out, "user {k}")?;
        require_finite(e.zeta_jam_per_watt[k], "zeta_jam")?;
        require_finite(e.zeta_bounds[k], "zeta_bounds")?;
        writeln!(out, "zeta_jam_per_watt {:?}", e.zeta_jam_per_watt[k])?;
        writeln!(out, "zeta_bounds {:?}", e.zeta_bounds[k])?;
        let m = &e.d[k];
        writeln!(out, "matrix {} {}", m.nrows(), m.ncols())?;
        for r in 0..m.nrows() {
            let mut row = String::new();
            for cc in 0..m.ncols() {
                let z = m[(r, cc)];
                require_finite(z.re, "matrix entry")?;
                require_finite(z.im, "matrix entry")?;
                if cc > 0 {
                    row.push(' ');
                }
                row.push_str(&format!("{:?} {:?}", z.re, z.im));
            }
            writeln!(out, "{row}")?;
        }
    }
    for (l, mask) in e.ap_masks.iter().enumerate() {
        let body: Vec<String> = mask.iter().map(|b| b.to_string()).collect();
        writeln!(out, "ap_mask {l} {}", body.join(" "))?;
    }
    writeln!(out, "end")?;
    Ok(())
}

fn parse_err(line_no: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line_no}: {msg}"))
}

fn parse_f64(tok: &str, line_no: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|e| parse_err(line_no, format!("bad float {tok:?}: {e}")))
}

fn parse_usize(tok: &str, line_no: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|e| parse_err(line_no, format!("bad integer {tok:?}: {e}")))
}

struct LineCursor {
    lines: Vec<String>,
    pos: usize,
}

impl LineCursor {
    fn next_line(&mut self, expect: &str) -> Result<(usize, String)> {
        if self.pos < self.lines.len() {
            self.pos += 1;
            Ok((self.pos, self.lines[self.pos - 1].clone()))
        } else {
            Err(Error::Parse(format!("unexpected end of input, expected {expect}")))
        }
    }

    fn scalar(&mut self, name: &str) -> Result<f64> {
        let (n, line) = self.next_line(name)?;
        let mut toks = line.split_whitespace();
        if toks.next() != Some(name) {
            return Err(parse_err(n, format!("expected {name} line, got {line:?}")));
        }
        parse_f64(toks.next().ok_or_else(|| parse_err(n, format!("{name} missing value")))?, n)
    }
}

/// Parse an export written by [`write_sdr`].
pub fn read_sdr<R: BufRead>(input: R) -> Result<SdrExport> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut cur = LineCursor { lines, pos: 0 };

    let (n, header) = cur.next_line("header")?;
    if header.trim() != "sdr-export v1" {
        return Err(parse_err(n, format!("unrecognized header {header:?}")));
    }
    let (n, dims_line) = cur.next_line("dims")?;
    let mut dims = std::collections::HashMap::new();
    let mut toks = dims_line.split_whitespace();
    if toks.next() != Some("dims") {
        return Err(parse_err(n, "expected dims line"));
    }
    for tok in toks {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(n, format!("bad dims token {tok:?}")))?;
        dims.insert(key.to_string(), parse_usize(value, n)?);
    }
    let get_dim = |key: &str| -> Result<usize> {
        dims.get(key).copied().ok_or_else(|| Error::Parse(format!("dims missing {key}")))
    };
    let (aps, ues, jammers) = (get_dim("aps")?, get_dim("ues")?, get_dim("jammers")?);
    let (ap_antennas, ue_antennas) = (get_dim("ap_antennas")?, get_dim("ue_antennas")?);
    let dim = aps * ap_antennas;

    let p_max_watts = cur.scalar("p_max")?;
    let sinr_threshold = cur.scalar("gamma")?;
    let noise_watts = cur.scalar("noise")?;

    let mut d = Vec::with_capacity(ues);
    let mut zeta_jam_per_watt = Vec::with_capacity(ues);
    let mut zeta_bounds = Vec::with_capacity(ues);
    for k in 0..ues {
        let (n, line) = cur.next_line("user")?;
        let expected = format!("user {k}");
        if line.trim() != expected {
            return Err(parse_err(n, format!("expected {expected:?}, got {line:?}")));
        }
        zeta_jam_per_watt.push(cur.scalar("zeta_jam_per_watt")?);
        zeta_bounds.push(cur.scalar("zeta_bounds")?);
        let (n, line) = cur.next_line("matrix")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "matrix" {
            return Err(parse_err(n, format!("expected matrix header, got {line:?}")));
        }
        let rows = parse_usize(toks[1], n)?;
        let cols = parse_usize(toks[2], n)?;
        if rows != dim || cols != dim {
            return Err(parse_err(n, format!("matrix {rows}x{cols} does not match dims {dim}")));
        }
        let mut m = CMat::zeros(rows, cols);
        for r in 0..rows {
            let (n, line) = cur.next_line("matrix row")?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 * cols {
                return Err(parse_err(
                    n,
                    format!("row has {} numbers, expected {}", toks.len(), 2 * cols),
                ));
            }
            for cc in 0..cols {
                let re = parse_f64(toks[2 * cc], n)?;
                let im = parse_f64(toks[2 * cc + 1], n)?;
                m[(r, cc)] = c(re, im);
            }
        }
        d.push(m);
    }

    let mut ap_masks = Vec::with_capacity(aps);
    for l in 0..aps {
        let (n, line) = cur.next_line("ap_mask")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 + dim || toks[0] != "ap_mask" {
            return Err(parse_err(n, format!("expected ap_mask with {dim} entries")));
        }
        if parse_usize(toks[1], n)? != l {
            return Err(parse_err(n, format!("ap_mask out of order: {line:?}")));
        }
        let mask: Vec<u8> = toks[2..]
            .iter()
            .map(|t| match *t {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(parse_err(n, format!("mask entry {other:?} not 0/1"))),
            })
            .collect::<Result<_>>()?;
        ap_masks.push(mask);
    }
    let (n, line) = cur.next_line("end")?;
    if line.trim() != "end" {
        return Err(parse_err(n, format!("expected end, got {line:?}")));
    }
    Ok(SdrExport {
        aps,
        ues,
        jammers,
        ap_antennas,
        ue_antennas,
        p_max_watts,
        sinr_threshold,
        noise_watts,
        d,
        zeta_jam_per_watt,
        zeta_bounds,
        ap_masks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ao::{ao_ajhbf, AoAjhbfScheme, AoConfig};
    use crate::channel::synthesize_channel;
    use crate::priors::{build_priors, EstimationConfig, PriorStreams};
    use crate::scene::{generate_scenario, LargeScaleModel, ScenarioConfig};
    use crate::tx::{per_ap_power, TxObjective};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_case(seed: u64) -> (PriorSet, Vec<CVec>, Vec<CVec>, f64) {
        let cfg = ScenarioConfig {
            aps: 2,
            ues: 2,
            jammers: 1,
            ap_antennas: 2,
            ap_rf_chains: 2,
            ue_antennas: 2,
            ue_rf_chains: 2,
            jammer_antennas: 2,
            ue_paths: 2,
            jammer_paths: 2,
            large_scale: LargeScaleModel::Fixed { gain: 1.0 },
            noise_watts: 0.05,
            p_max_watts: 2.0,
            sinr_threshold: 0.5,
            ..ScenarioConfig::desk()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scenario = generate_scenario(&cfg, &mut rng).unwrap();
        let (geometry, set) = synthesize_channel(&scenario, &mut rng).unwrap();
        let est = EstimationConfig { n_stat: 5, ..EstimationConfig::default() };
        let priors =
            build_priors(&scenario, &geometry, &set, &est, &mut PriorStreams::from_seed(seed))
                .unwrap();
        let mut scheme = AoAjhbfScheme::new(2, 2);
        let out = ao_ajhbf(&priors, &mut scheme, &AoConfig::default()).unwrap();
        (priors, out.state.combiners, out.state.precoders, out.search.q_watts)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (priors, w, _, _) = tiny_case(1);
        let export = build_sdr_export(&priors, &w);
        let mut buf = Vec::new();
        write_sdr(&export, &mut buf).unwrap();
        let parsed = read_sdr(buf.as_slice()).unwrap();
        assert_eq!(export.aps, parsed.aps);
        assert_eq!(export.ap_masks, parsed.ap_masks);
        for k in 0..export.ues {
            assert_eq!(
                export.zeta_jam_per_watt[k].to_bits(),
                parsed.zeta_jam_per_watt[k].to_bits()
            );
            assert_eq!(export.zeta_bounds[k].to_bits(), parsed.zeta_bounds[k].to_bits());
            for (a, b) in export.d[k].iter().zip(parsed.d[k].iter()) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
        assert_eq!(export, parsed);
    }

    #[test]
    fn sensing_matrices_are_rank_one_psd() {
        let (priors, w, _, _) = tiny_case(3);
        let export = build_sdr_export(&priors, &w);
        for (k, m) in export.d.iter().enumerate() {
            assert!(crate::linalg::hermitian_residual(m) < 1e-12);
            let eig = nalgebra::SymmetricEigen::new(m.clone());
            let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
            ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!(ev[0] >= 0.0);
            for &e in &ev[1..] {
                assert!(e.abs() < 1e-10 * ev[0].max(1e-300), "user {k}: eigenvalue {e}");
            }
            // trace(D) = ||a||^2.
            let a = priors.hbar_stacked(k).adjoint() * &w[k];
            let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
            assert!((tr - a.norm_squared()).abs() < 1e-10 * tr.max(1e-300));
        }
    }

    #[test]
    fn export_semantics_match_direct_sinr() {
        // Dual route: the quadratic forms in the export reproduce the SINR
        // bound computed by the transmit-side objective.
        let (priors, w, f, q) = tiny_case(5);
        let export = build_sdr_export(&priors, &w);
        let obj = TxObjective::new(&priors, &w, q, -4.0);
        for k in 0..priors.ues {
            let via_export = export.sinr_at(&f, k, q);
            let direct = obj.sinr_lb(&f, k);
            assert!(
                (via_export - direct).abs() < 1e-9 * direct.max(1e-300),
                "user {k}: {via_export} vs {direct}"
            );
        }
    }

    #[test]
    fn ap_masks_reproduce_block_powers() {
        let (priors, w, f, _) = tiny_case(7);
        let export = build_sdr_export(&priors, &w);
        // tr(S_l F) over all users equals the block power of AP l.
        for l in 0..priors.aps {
            let via_mask: f64 = f
                .iter()
                .map(|fk| {
                    export.ap_masks[l]
                        .iter()
                        .enumerate()
                        .filter(|(_, &m)| m == 1)
                        .map(|(i, _)| fk[i].norm_sqr())
                        .sum::<f64>()
                })
                .sum();
            let direct = per_ap_power(&f, l, priors.ap_antennas);
            assert!((via_mask - direct).abs() < 1e-12 * direct.max(1e-300));
        }
        // Masks partition the stacked dimension.
        let dim = priors.aps * priors.ap_antennas;
        for i in 0..dim {
            let total: u8 = export.ap_masks.iter().map(|m| m[i]).sum();
            assert_eq!(total, 1);
        }
    }

    #[test]
    fn zeta_recombines_linearly_in_q() {
        let (priors, w, _, _) = tiny_case(9);
        let export = build_sdr_export(&priors, &w);
        for k in 0..priors.ues {
            let z0 = export.zeta(k, 0.0);
            let z2 = export.zeta(k, 2.0);
            let slope = (z2 - z0) / 2.0;
            assert!((slope - export.zeta_jam_per_watt[k]).abs() < 1e-12 * slope.max(1e-300));
            assert!(
                (z0 - export.zeta_bounds[k] - export.noise_watts).abs()
                    < 1e-15 * z0.max(1e-300)
            );
        }
    }

    #[test]
    fn parser_rejects_malformed_inputs() {
        let (priors, w, _, _) = tiny_case(11);
        let export = build_sdr_export(&priors, &w);
        let mut buf = Vec::new();
        write_sdr(&export, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        // Truncation.
        let cut = &text[..text.len() / 2];
        assert!(read_sdr(cut.as_bytes()).is_err());
        // Corrupt header.
        let bad = text.replacen("sdr-export v1", "sdr-export v9", 1);
        assert!(read_sdr(bad.as_bytes()).is_err());
        // Corrupt a float.
        let bad = text.replacen("p_max ", "p_max x", 1);
        assert!(read_sdr(bad.as_bytes()).is_err());
        // Missing end marker.
        let bad = text.trim_end().trim_end_matches("end").to_string();
        assert!(read_sdr(bad.as_bytes()).is_err());
    }

    #[test]
    fn writer_rejects_non_finite_values() {
        let (priors, w, _, _) = tiny_case(13);
        let mut export = build_sdr_export(&priors, &w);
        export.zeta_bounds[0] = f64::NAN;
        let mut buf = Vec::new();
        assert!(write_sdr(&export, &mut buf).is_err());
    }
}
