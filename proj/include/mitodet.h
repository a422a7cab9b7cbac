/* mitodet — two-stage mitosis detection and atypical-mitosis classification.
 *
 * C interface of the shared library. All functions return MDT_OK (0) on
 * success or an error code; mdt_last_error() returns a thread-local message
 * describing the most recent failure on the calling thread. Objects are
 * opaque handles created and released through their mdt_*_new/free pairs.
 */
#ifndef MITODET_H
#define MITODET_H

#include <stddef.h>

#if defined(_WIN32)
#define MDT_API __declspec(dllexport)
#else
#define MDT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define MDT_OK 0
#define MDT_ERR_BAD_INPUT 2 /* invalid arguments, malformed or missing files */
#define MDT_ERR_INTERNAL 3  /* everything else */

MDT_API const char* mdt_version(void);

/* Message for the most recent error on this thread; empty string if none. */
MDT_API const char* mdt_last_error(void);

/* ---- options ------------------------------------------------------------
 * String key/value overrides applied on top of the TOML config (dotted keys,
 * e.g. "track1.decision_threshold" = "0.4") plus command options such as
 * "workers", "seed", "radius", "mask_radius", "patch_size", "stage1_dir".
 */
typedef struct mdt_options mdt_options;

MDT_API mdt_options* mdt_options_new(void);
MDT_API void mdt_options_free(mdt_options* options);
MDT_API int mdt_options_set(mdt_options* options, const char* key, const char* value);

/* ---- pipeline commands ---------------------------------------------------
 * File/directory level operations; `options` may be NULL. Output files are
 * written atomically (temp file + rename).
 */

/* masks + patches + manifest.json from annotation/image directories */
MDT_API int mdt_build_dataset(const char* annotations_dir, const char* images_dir, const char* out_dir,
                      const mdt_options* options);

/* track-1 detection: one prediction JSON per image in out_dir */
MDT_API int mdt_detect(const char* config_path, const char* images_dir, const char* out_dir,
               const mdt_options* options);

/* track-2 classification of a directory of patches into one JSON file */
MDT_API int mdt_classify(const char* config_path, const char* patches_dir, const char* out_file,
                 const mdt_options* options);

/* trains the verification forest and writes forest + threshold report
 * (report path defaults to <out_forest stem>.threshold.json) */
MDT_API int mdt_fit_ensemble(const char* config_path, const char* train_dir, const char* val_dir,
                     const char* out_forest, const mdt_options* options);

/* scores predictions against ground truth; detection directories get a
 * matching-based report, classification files a balanced-accuracy report */
MDT_API int mdt_evaluate(const char* pred_path, const char* gt_path, const char* out_report,
                 const mdt_options* options);

/* F1-vs-threshold curve with best threshold and plateau */
MDT_API int mdt_sweep(const char* pred_path, const char* gt_path, const char* out_file,
              const mdt_options* options);

/* writes a ready-to-run synthetic fixture (images, annotations, oracle
 * backend artifacts, patches, config.toml) */
MDT_API int mdt_make_demo(const char* out_dir, const mdt_options* options);

/* ---- fitted forest --------------------------------------------------------
 * Direct access to a serialized verification forest.
 */
typedef struct mdt_forest mdt_forest;

MDT_API int mdt_forest_load(const char* path, mdt_forest** out_forest);
MDT_API void mdt_forest_free(mdt_forest* forest);
MDT_API int mdt_forest_n_features(const mdt_forest* forest);
MDT_API int mdt_forest_predict(const mdt_forest* forest, const double* features, size_t n_features,
                       double* out_probability);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MITODET_H */
