use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::formats::{read_flo, read_png};
use crate::imgproc::ImageF32;
use crate::mining::{FlowSource, FrameSource};
use crate::warp::FlowField;

/// The PNG files of a directory, in file-name order.
#[derive(Clone, Debug)]
pub struct DirFrames {
    paths: Vec<PathBuf>,
}

impl DirFrames {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut paths = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            let is_png = path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("png"));
            if is_png && path.is_file() {
                paths.push(path);
            }
        }
        paths.sort();
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }

    /// File stems, used to name flow files.
    pub fn stems(&self) -> Vec<String> {
        self.paths
            .iter()
            .map(|p| {
                p.file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned()
            })
            .collect()
    }
}

impl FrameSource for DirFrames {
    fn len(&self) -> usize {
        self.paths.len()
    }

    fn name(&self, index: usize) -> String {
        self.paths[index]
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned()
    }

    fn load(&self, index: usize) -> Result<ImageF32> {
        read_png(&self.paths[index])
    }
}

/// `<from>_to_<to>.flo`
pub fn flow_file_name(from_stem: &str, to_stem: &str) -> String {
    format!("{from_stem}_to_{to_stem}.flo")
}

/// Flow files in one directory, named by [`flow_file_name`] from frame stems.
#[derive(Clone, Debug)]
pub struct DirFlows {
    dir: PathBuf,
    stems: Vec<String>,
}

impl DirFlows {
    pub fn new(dir: impl Into<PathBuf>, stems: Vec<String>) -> Self {
        Self {
            dir: dir.into(),
            stems,
        }
    }
}

impl FlowSource for DirFlows {
    fn flow(&self, from: usize, to: usize) -> Result<Option<FlowField>> {
        let path = self
            .dir
            .join(flow_file_name(&self.stems[from], &self.stems[to]));
        if !path.exists() {
            return Ok(None);
        }
        read_flo(&path).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{write_flo, write_png};

    #[test]
    fn directory_sources() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.png", "a.png", "notes.txt"] {
            let p = dir.path().join(name);
            if name.ends_with(".png") {
                write_png(&ImageF32::filled(2, 3, 3, 0.2), &p).unwrap();
            } else {
                std::fs::write(p, "x").unwrap();
            }
        }
        let frames = DirFrames::open(dir.path()).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames.name(0), "a.png");
        assert_eq!(frames.stems(), vec!["a", "b"]);
        assert_eq!(frames.load(1).unwrap().shape(), (2, 3, 3));

        let f = FlowField::uniform(2, 3, 1.5, -0.5);
        write_flo(&f, dir.path().join(flow_file_name("a", "b"))).unwrap();
        let flows = DirFlows::new(dir.path(), frames.stems());
        assert_eq!(flows.flow(0, 1).unwrap(), Some(f));
        assert_eq!(flows.flow(1, 0).unwrap(), None);
    }
}
