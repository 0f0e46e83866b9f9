//! Trajectory-file ingestion: whitespace-separated `frame id x y` rows in
//! world coordinates, resampled by linear interpolation onto the global
//! 0.4-second grid. No extrapolation beyond an agent's observed span.

use crate::error::{Error, Result};
use crate::scene::AgentTrack;
use crate::vec2::Vec2;
use crate::DT;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub fn load_trajectories(path: &Path, frame_rate: f64) -> Result<Vec<AgentTrack>> {
    if frame_rate <= 0.0 {
        return Err(Error::InvalidConfig("frame_rate must be positive".into()));
    }
    let text = std::fs::read_to_string(path)?;
    let mut per_agent: BTreeMap<i64, Vec<(usize, f64, Vec2)>> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::MalformedRow {
                line: line_no,
                reason: format!("expected 4 columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::MalformedRow {
                line: line_no,
                reason: format!("bad {what} value '{s}'"),
            })
        };
        let frame = parse(fields[0], "frame")?;
        let id = parse(fields[1], "id")? as i64;
        let x = parse(fields[2], "x")?;
        let y = parse(fields[3], "y")?;
        if !x.is_finite() || !y.is_finite() || !frame.is_finite() {
            return Err(Error::MalformedRow {
                line: line_no,
                reason: "non-finite value".into(),
            });
        }
        per_agent
            .entry(id)
            .or_default()
            .push((line_no, frame / frame_rate, Vec2::new(x, y)));
    }

    let mut tracks = Vec::new();
    for (id, samples) in per_agent {
        for w in samples.windows(2) {
            if w[1].1 <= w[0].1 {
                return Err(Error::MalformedRow {
                    line: w[1].0,
                    reason: format!("frames for agent {id} not strictly increasing"),
                });
            }
        }
        if let Some(track) = resample(id, &samples) {
            tracks.push(track);
        }
    }
    Ok(tracks)
}

/// Linear interpolation onto the global `DT` grid. Grid points exactly at a
/// sample time reproduce that sample; nothing is emitted outside the
/// observed span.
fn resample(id: i64, samples: &[(usize, f64, Vec2)]) -> Option<AgentTrack> {
    let t0 = samples.first()?.1;
    let t1 = samples.last()?.1;
    const EPS: f64 = 1e-9;
    let k0 = ((t0 - EPS) / DT).ceil() as i64;
    let k1 = ((t1 + EPS) / DT).floor() as i64;
    if k1 < k0 {
        return None;
    }
    let mut out = Vec::with_capacity((k1 - k0 + 1) as usize);
    let mut seg = 0usize;
    for k in k0..=k1 {
        let t = k as f64 * DT;
        while seg + 1 < samples.len() && samples[seg + 1].1 < t - EPS {
            seg += 1;
        }
        let (_, ta, pa) = samples[seg];
        let pos = if (t - ta).abs() <= EPS || seg + 1 == samples.len() {
            pa
        } else {
            let (_, tb, pb) = samples[seg + 1];
            if (t - tb).abs() <= EPS {
                pb
            } else {
                let alpha = (t - ta) / (tb - ta);
                pa + (pb - pa) * alpha
            }
        };
        out.push((t, pos));
    }
    Some(AgentTrack::new(id, out))
}

/// Emit tracks in the ingestion format. Timestamps become frame numbers at
/// the given frame rate.
pub fn write_trajectory_file(tracks: &[AgentTrack], frame_rate: f64, path: &Path) -> Result<()> {
    let mut rows: Vec<(f64, i64, Vec2)> = Vec::new();
    for t in tracks {
        for (time, pos) in &t.samples {
            rows.push((time * frame_rate, t.agent_id, *pos));
        }
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut f = std::fs::File::create(path)?;
    for (frame, id, pos) in rows {
        writeln!(f, "{} {} {} {}", frame, id, pos.x, pos.y)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(content: &str, frame_rate: f64) -> Result<Vec<AgentTrack>> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("data.txt");
        std::fs::write(&p, content).unwrap();
        load_trajectories(&p, frame_rate)
    }

    #[test]
    fn interpolates_onto_grid() {
        // Frame rate 2: frame 0 -> t=0, frame 1 -> t=0.5.
        let tracks = load_str("0 1 0 0\n1 1 1 0\n", 2.0).unwrap();
        assert_eq!(tracks.len(), 1);
        let t = &tracks[0];
        // Grid points 0.0 and 0.4 fall inside [0, 0.5].
        assert_eq!(t.samples.len(), 2);
        assert_eq!(t.samples[0].1, Vec2::new(0.0, 0.0));
        assert!((t.samples[1].1.x - 0.8).abs() < 1e-12);
        assert_eq!(t.samples[1].1.y, 0.0);
    }

    #[test]
    fn on_grid_samples_unchanged() {
        // Frame rate 2.5: one frame per 0.4 s.
        let tracks = load_str("0 7 1.5 2.5\n1 7 1.9 2.5\n2 7 2.3 2.5\n", 2.5).unwrap();
        let t = &tracks[0];
        assert_eq!(t.samples.len(), 3);
        assert_eq!(t.samples[0].1, Vec2::new(1.5, 2.5));
        assert_eq!(t.samples[1].1, Vec2::new(1.9, 2.5));
        assert_eq!(t.samples[2].1, Vec2::new(2.3, 2.5));
        assert!(t.is_on_grid());
    }

    #[test]
    fn single_sample_agent() {
        // On-grid single sample survives; off-grid one disappears.
        let on = load_str("2 5 1.0 1.0\n", 2.5).unwrap();
        assert_eq!(on.len(), 1);
        assert_eq!(on[0].samples.len(), 1);
        let off = load_str("1 5 1.0 1.0\n", 2.0).unwrap();
        assert!(off.is_empty());
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = load_str("0 1 0 0\nbogus row here\n", 2.5).unwrap_err();
        match err {
            Error::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let err = load_str("0 1 0 0\n1 1 nan 0\n", 2.5).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn non_increasing_frames_rejected() {
        let err = load_str("5 1 0 0\n5 1 1 0\n", 2.5).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn exact_on_affine_tracks() {
        // Linear motion sampled at odd times interpolates exactly.
        let mut content = String::new();
        for i in 0..10 {
            let t = i as f64 * 0.3;
            content.push_str(&format!("{} 3 {} {}\n", t, 1.2 * t, -0.5 * t));
        }
        // frame_rate 1: frames are seconds.
        let tracks = load_str(&content, 1.0).unwrap();
        for (t, pos) in &tracks[0].samples {
            assert!((pos.x - 1.2 * t).abs() < 1e-12);
            assert!((pos.y + 0.5 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_through_writer() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        let tracks = vec![AgentTrack::new(
            4,
            (0..6).map(|i| (i as f64 * DT, Vec2::new(i as f64, 0.5))).collect(),
        )];
        write_trajectory_file(&tracks, 2.5, &p).unwrap();
        let loaded = load_trajectories(&p, 2.5).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].samples.len(), 6);
        for (a, b) in loaded[0].samples.iter().zip(tracks[0].samples.iter()) {
            assert!((a.0 - b.0).abs() < 1e-9);
            assert!((a.1 - b.1).norm() < 1e-9);
        }
    }
}
