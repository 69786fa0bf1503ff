/* Copyright 2026 The Hemoflow Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

/* C interface of libhemoflow. Every call returns an hf_status; on failure the
 * message is available from hf_last_error() on the same thread until the next
 * call. Handles are opaque and owned by the caller. */

#ifndef HEMOFLOW_H
#define HEMOFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(HEMOFLOW_BUILDING)
#define HF_API __declspec(dllexport)
#else
#define HF_API __declspec(dllimport)
#endif
#else
#define HF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes for the command-line tool. */
typedef enum hf_status {
  HF_OK = 0,
  HF_ERROR = 2,           /* invalid input, I/O, parse or validation failure */
  HF_ERROR_NUMERICAL = 3, /* a numerical procedure failed */
} hf_status;

typedef struct hf_config hf_config;
typedef struct hf_mesh hf_mesh;

typedef struct hf_power_law {
  double m;   /* Pa s^n */
  double n;
  double hct; /* percent */
  double r2;
  double rmse; /* Pa s */
} hf_power_law;

/* Any consistent unit system; the flow CSV must use the same one. */
typedef struct hf_windkessel_params {
  double rp;
  double rd;
  double c;
  double p_d0;
} hf_windkessel_params;

HF_API const char* hf_version(void);
HF_API const char* hf_last_error(void);

/* Rheology. A NULL base_curves_csv selects the built-in base curves. */
HF_API hf_status hf_fit_for_hct(double hct, const char* base_curves_csv, hf_power_law* out);
/* Fits `shear_rate,viscosity,hct` measurements of one hematocrit. */
HF_API hf_status hf_fit_measurements(const char* measurements_csv, hf_power_law* out);
HF_API hf_status hf_newtonian_equivalent(const hf_power_law* pl, double gamma0, double gamma1, double* mu);
HF_API hf_status hf_write_params(const char* path, const hf_power_law* params, size_t count);

/* Run configuration. */
HF_API hf_status hf_config_default(hf_config** out);
HF_API hf_status hf_config_load(const char* ini_path, hf_config** out);
HF_API void hf_config_free(hf_config* config);
HF_API hf_status hf_config_set_seed(hf_config* config, uint64_t seed);
HF_API hf_status hf_config_set_output(hf_config* config, const char* dir);
/* Copies the output directory into buf (NUL terminated). */
HF_API hf_status hf_config_output(const hf_config* config, char* buf, size_t size);
HF_API hf_status hf_config_validate(const hf_config* config);

/* Pipeline. `out` may be NULL to use the configured output directory.
 * Stages: "phantom", "synth-mri", "reconstruct", "estimate", "windkessel". */
HF_API hf_status hf_run_pipeline(const hf_config* config, const char* out);
HF_API hf_status hf_run_stage(const hf_config* config, const char* stage, const char* out);
HF_API hf_status hf_write_manifest(const hf_config* config, const char* out);
HF_API hf_status hf_render_report(const char* out, const char* reference_model);

/* Writes the relative difference table of two stats CSVs; `max_abs` receives
 * the largest absolute difference (may be NULL). */
HF_API hf_status hf_compare_stats_files(const char* reference_csv, const char* other_csv, const char* out_csv,
                                        double* max_abs);

/* Simulates with the flow given as a `t,value` CSV (closing row repeated).
 * scaling is "periodic", "mean" or "none". Writes the last cycle to out_csv; `drift` receives the last cycle-to-cycle change (may be NULL). */
HF_API hf_status hf_windkessel_run(const hf_windkessel_params* params, const char* flow_csv, double dt, int cycles,
                                   const char* scaling, const char* out_csv, double* drift);

/* Meshes. */
HF_API hf_status hf_mesh_generate_pipe(double radius, double length, int resolution, hf_mesh** out);
HF_API hf_status hf_mesh_load(const char* path, hf_mesh** out);
HF_API hf_status hf_mesh_save(const hf_mesh* mesh, const char* path);
HF_API size_t hf_mesh_vertex_count(const hf_mesh* mesh);
HF_API size_t hf_mesh_tet_count(const hf_mesh* mesh);
HF_API double hf_mesh_volume(const hf_mesh* mesh);
HF_API void hf_mesh_free(hf_mesh* mesh);

#ifdef __cplusplus
}
#endif

#endif
