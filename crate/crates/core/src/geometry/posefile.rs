//! Plain-text pose lists: `name qw qx qy qz cx cy cz` per line, `#` comments.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use super::Pose;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPose {
    pub name: String,
    pub pose: Pose,
}

pub fn read_pose_file(path: impl AsRef<Path>) -> Result<Vec<NamedPose>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_poses(&text, path)
}

pub(crate) fn parse_poses(text: &str, path: &Path) -> Result<Vec<NamedPose>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 8 fields `name qw qx qy qz cx cy cz`, found {}", fields.len()),
            ));
        }
        let mut nums = [0.0f64; 7];
        for (slot, field) in nums.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("invalid number `{field}`")))?;
        }
        let pose = Pose::new(
            Vector3::new(nums[4], nums[5], nums[6]),
            [nums[0], nums[1], nums[2], nums[3]],
        )
        .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        out.push(NamedPose {
            name: fields[0].to_string(),
            pose,
        });
    }
    Ok(out)
}

pub fn format_pose_line(name: &str, pose: &Pose) -> String {
    let q = pose.quat();
    let c = pose.center();
    format!(
        "{name} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
        q.w, q.x, q.y, q.z, c.x, c.y, c.z
    )
}

pub fn write_pose_file(path: impl AsRef<Path>, poses: &[NamedPose], comment: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    if let Some(c) = comment {
        writeln!(buf, "# {c}").expect("write to Vec");
    }
    writeln!(buf, "# name qw qx qy qz cx cy cz").expect("write to Vec");
    for p in poses {
        writeln!(buf, "{}", format_pose_line(&p.name, &p.pose)).expect("write to Vec");
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let poses = vec![
            NamedPose {
                name: "a".into(),
                pose: Pose::new(Vector3::new(0.1, -2.5, 1e-7), [0.9, 0.1, 0.2, 0.3]).unwrap(),
            },
            NamedPose {
                name: "b".into(),
                pose: Pose::identity(),
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poses.txt");
        write_pose_file(&path, &poses, Some("test")).unwrap();
        assert_eq!(read_pose_file(&path).unwrap(), poses);
    }

    #[test]
    fn bad_line_reports_line_number() {
        let err = parse_poses("# header\nq1 1 0 0 0 1 2\n", Path::new("x.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_poses("q1 1 0 0 zero 1 2 3\n", Path::new("x.txt")).unwrap_err();
        assert!(err.to_string().contains("zero"));
    }
}
