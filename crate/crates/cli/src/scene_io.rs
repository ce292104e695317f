//! JSON scene files and the OBJ mesh subset they may reference.

use std::fs;
use std::path::{Path, PathBuf};

use g3d_core::scene::{MeshData, Scene, SceneDesc};
use g3d_core::Vec3;

use crate::{io_err, CliError, Result};

/// Parses a scene document. `path` is only used in error messages.
pub fn parse_scene_desc(text: &str, path: &Path) -> Result<SceneDesc> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads `v` and triangle or polygon `f` lines. Polygons are fanned into
/// triangles; `f` indices may be negative or carry `/vt/vn` suffixes.
/// Everything else is ignored.
pub fn parse_obj(text: &str, path: &Path) -> Result<MeshData> {
    let mut mesh = MeshData::default();
    for (k, line) in text.lines().enumerate() {
        let err = |message: String| CliError::Obj {
            path: path.to_path_buf(),
            line: k + 1,
            message,
        };
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| err(format!("bad coordinate '{t}': {e}"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 || c.iter().any(|v| !v.is_finite()) {
                    return Err(err("vertex needs three finite coordinates".into()));
                }
                mesh.vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let n = mesh.vertices.len() as i64;
                let idx: Vec<usize> = tok
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|_| err(format!("bad index '{t}'")))?;
                        let j = if i < 0 { n + i } else { i - 1 };
                        if i == 0 || j < 0 || j >= n {
                            return Err(err(format!("index {i} out of range")));
                        }
                        Ok(j as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for w in 1..idx.len() - 1 {
                    mesh.faces.push([idx[0], idx[w], idx[w + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(mesh)
}

/// Builds a scene, resolving `obj` references relative to `base_dir`.
pub fn build_scene(desc: SceneDesc, base_dir: &Path) -> Result<Scene> {
    let mut failure: Option<CliError> = None;
    let built = Scene::with_meshes(desc, |rel| {
        let full: PathBuf = base_dir.join(rel);
        let loaded = fs::read_to_string(&full)
            .map_err(io_err(&full))
            .and_then(|text| parse_obj(&text, &full));
        loaded.map_err(|e| {
            let msg = e.to_string();
            failure = Some(e);
            g3d_core::Error::InvalidScene(msg)
        })
    });
    match (built, failure) {
        (Ok(s), _) => Ok(s),
        (Err(_), Some(e)) => Err(e),
        (Err(e), None) => Err(CliError::Scene {
            path: base_dir.to_path_buf(),
            source: e,
        }),
    }
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let desc = parse_scene_desc(&text, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    build_scene(desc, base).map_err(|e| match e {
        CliError::Scene { source, .. } => CliError::Scene {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn scene_to_json(desc: &SceneDesc) -> String {
    serde_json::to_string_pretty(desc).expect("scene descriptions always serialize")
}

pub fn save_scene(desc: &SceneDesc, path: &Path) -> Result<()> {
    fs::write(path, scene_to_json(desc) + "\n").map_err(io_err(path))
}

/// Built-in scenes by name, at the given resolution.
pub fn builtin_scene(name: &str, width: usize, height: usize) -> Option<Scene> {
    use g3d_core::scene::*;
    Some(match name {
        "glass_sphere" => glass_sphere_scene(width, height),
        "two_caster" => two_caster_scene(width, height),
        "no_caster" => no_caster_scene(width, height),
        "parallax" => parallax_scene(width, height),
        "visibility_toy" => visibility_toy_scene(),
        _ => return None,
    })
}

pub const BUILTIN_SCENES: [&str; 5] = ["glass_sphere", "two_caster", "no_caster", "parallax", "visibility_toy"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_subset() {
        let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3 4\nf -4/1/1 -3 -2\n";
        let m = parse_obj(text, Path::new("q.obj")).unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3], [0, 1, 2]]);
    }

    #[test]
    fn obj_errors_name_the_line() {
        let e = parse_obj("v 0 0 0\nf 1 2 3\n", Path::new("m.obj")).unwrap_err();
        assert_eq!(e.to_string(), "m.obj:2: index 2 out of range");
        let e = parse_obj("v 0 x 0\n", Path::new("m.obj")).unwrap_err();
        assert!(e.to_string().starts_with("m.obj:1: bad coordinate"));
    }

    #[test]
    fn json_errors_carry_position() {
        let e = parse_scene_desc("{\n  \"camera\": 3\n}", Path::new("s.json")).unwrap_err();
        match e {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (2, 13)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_SCENES {
            let s = builtin_scene(name, 8, 6).unwrap();
            let back = parse_scene_desc(&scene_to_json(s.desc()), Path::new("x")).unwrap();
            assert_eq!(&back, s.desc());
        }
        assert!(builtin_scene("nope", 1, 1).is_none());
    }
}
