//! Text printed by `tessgof export-formats`.

pub const TESSELLATION_FORMAT: &str = r#"TESSELLATION FILE (.tess)

tessgof-tessellation v1
dim 3
window 1 periodic            # edge length, then periodic or bounded
[generators]
0 0.12 0.5 0.33 0.0          # id x y z radius
[vertices]
0 0.2 0.41 0.9               # id x y z (wrapped into the window)
[faces q=1]
0 ; 3 7 ; 0 4 9              # id ; vertex ids ; incident cell (generator) ids
[faces q=2]
...                          # 2-face vertices in cyclic order
[faces q=3]
...

Ids run from 0 in file order within each section. Boundary relations are
derived from vertex-set inclusion. Everything after `#` is ignored. In
periodic files a face line may end with a fourth field holding the integer
lattice translate (three integers) of each listed vertex and then of each
incident generator, which places the face in one unwrapped frame; files
written by tessgof always carry it. Two-dimensional complexes use `dim 2`,
z = 0 and sections up to q=2.
"#;

pub const CONFIG_FORMAT: &str = r#"EXPERIMENT CONFIG (JSON, schema_version 1)

{
  "schema_version": 1,
  "name": "example",
  "description": "optional free text",
  "models": [
    { "preset": "bin-vor", "n_cells": 100 },
    { "name": "my-strauss",
      "window": { "edge_length": 1.0, "periodic": true },
      "generator": { "process": "strauss", "n_points": 300, "gamma": 0.01, "r0": 0.14, "n_sweeps": 500 },
      "tessellation": "voronoi" }
  ],
  "nulls": ["bin-vor"],                  optional, default all models
  "alternatives": ["bin-vor", "my-strauss"],  optional, default all models
  "statistics": [
    { "kind": "area", "threshold": { "quantile": 0.4 } },
    { "kind": "persistence", "threshold": { "quantile": 0.7 }, "q_dim": 1 }
  ],
  "n_calibration": 200,
  "n_test": 200,
  "alpha": 0.05,
  "master_seed": 1,
  "output_dir": "out/example",
  "workers": 4,                          optional; TESSGOF_WORKERS overrides
  "exports": { "diagrams": true, "densities": true, "tessellations": false, "density_grid": 512 }
}

Presets: bin-vor st-vor fb-vor bin-lag st-lag fb-lag. Generator processes:
binomial {n_points}, strauss {n_points, gamma, r0, n_sweeps},
force_biased {n_spheres, radii, volume_fraction?, max_iterations?,
overlap_tolerance?}. Radius laws: {"kind": "constant", "radius": r} and
{"kind": "lognormal_volume", "mu": m, "sigma": s}. Laguerre models with binomial
or Strauss generators need "radii". Statistic kinds: area, inradius,
persistence, edge_betti, localized_betti, euler; optional fields q_dim, m,
pooling (pooled | per_rep_median) and noise {vertex_noise_h0,
edge_thickness, seed}. Thresholds are {"quantile": p} or {"absolute": a}.

The config hash is the SHA-256 of the validated experiment with presets
expanded, excluding output_dir and workers.
"#;

pub const OUTPUT_FORMAT: &str = r#"RUN OUTPUTS (tessgof run)

Every CSV and tessellation file starts with
  # tessgof config_sha256=<hex> master_seed=<seed>
and its body is byte-identical across runs of the same config, whatever the
worker count.

config.json                  validated experiment, hash and seed
calibration.csv              null_model,statistic,rep,seed,value
calibration_summary.csv      null_model,statistic,threshold,mean,variance,skewness,anderson_darling_a2,anderson_darling_p
test.csv                     null_model,alternative,statistic,rep,seed,value,z,reject
power_<statistic>.csv        rejection rates; rows are nulls, columns alternatives
densities/<null>_<stat>.csv  kernel density of the standardized calibration sample (z,density)
diagrams/<model>.csv         persistence diagram of replication 0: dim,birth,death,birth_face,killing_face
tessellations/<model>.tess   replication 0, when exports.tessellations is set

TEST REPORT (tessgof test): JSON on standard output with config_sha256,
master_seed, data, null_model, n_calibration and report {statistic, value,
threshold, mean, variance, z, p_value, alpha, reject}.
"#;

pub const EXIT_CODES: &str = r#"EXIT CODES

0  success
1  other failure, e.g. a statistic that is constant under the null
2  invalid command line, configuration or statistic spec
3  a generator did not converge
4  degenerate geometry or a window too small for its configuration
5  a file could not be read or written
6  malformed tessellation file
"#;

pub fn all() -> String {
    [
        TESSELLATION_FORMAT,
        CONFIG_FORMAT,
        OUTPUT_FORMAT,
        EXIT_CODES,
    ]
    .join("\n")
}
