//! Regenerates the JSON scene corpus in `scenes/` from the built-in scenes.
//!
//! cargo run -p g3d-cli --example write_scenes -- scenes

use std::path::PathBuf;

use g3d_cli::scene_io::{builtin_scene, save_scene, BUILTIN_SCENES};

fn main() -> anyhow::Result<()> {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "scenes".into()).into();
    std::fs::create_dir_all(&dir)?;
    for name in BUILTIN_SCENES {
        let scene = builtin_scene(name, 160, 120).expect("listed built-in");
        let path = dir.join(format!("{name}.json"));
        save_scene(scene.desc(), &path)?;
        println!("{}", path.display());
    }
    Ok(())
}
