use std::path::{Path, PathBuf};

/// File names inside an experiment output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn train_dataset(&self) -> PathBuf {
        self.root.join("train.fepds")
    }

    pub fn test_dir(&self) -> PathBuf {
        self.root.join("test")
    }

    pub fn test_dataset(&self, point: usize) -> PathBuf {
        self.test_dir().join(format!("snr_{point:02}.fepds"))
    }

    pub fn curve_dir(&self) -> PathBuf {
        self.root.join("curves")
    }

    pub fn curve(&self, k: usize) -> PathBuf {
        self.curve_dir().join(format!("awgn_k{k}.curve"))
    }

    pub fn eesm_manifest(&self) -> PathBuf {
        self.root.join("eesm").join("eesm.manifest")
    }

    pub fn calibration_csv(&self) -> PathBuf {
        self.root.join("calibration.csv")
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("model.fepmlp")
    }

    pub fn train_log(&self) -> PathBuf {
        self.root.join("train_log.csv")
    }

    pub fn rmse_csv(&self) -> PathBuf {
        self.root.join("rmse.csv")
    }

    pub fn throughput_csv(&self) -> PathBuf {
        self.root.join("throughput.csv")
    }

    pub fn decisions_csv(&self) -> PathBuf {
        self.root.join("decisions.csv")
    }
}
