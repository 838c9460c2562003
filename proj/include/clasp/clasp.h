/*
 * C interface to the clasp segmentation engine.
 *
 * Objects are opaque handles created by *_read / *_create / clasp_segment and
 * released with the matching *_free. Every fallible call returns a
 * clasp_status; on failure clasp_last_error() holds a one-line message for
 * the calling thread. Handles are immutable after creation and may be shared
 * across threads.
 */
#ifndef CLASP_CLASP_H
#define CLASP_CLASP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CLASP_BUILDING_LIBRARY)
#    define CLASP_API __declspec(dllexport)
#  else
#    define CLASP_API __declspec(dllimport)
#  endif
#else
#  define CLASP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clasp_status {
    CLASP_OK = 0,
    CLASP_ERR_INVALID_ARGUMENT = 1,
    CLASP_ERR_DIMENSION_TOO_SMALL = 2,
    CLASP_ERR_BAD_MAGIC = 3,
    CLASP_ERR_VERSION_MISMATCH = 4,
    CLASP_ERR_CORRUPT_HEADER = 5,
    CLASP_ERR_ZERO_NORM_FEATURE = 6,
    CLASP_ERR_TRUNCATED_PAYLOAD = 7,
    CLASP_ERR_IO = 8,
    CLASP_ERR_CONVERGENCE = 9,
    CLASP_ERR_TOO_FEW_EIGENVALUES = 10,
    CLASP_ERR_BAD_BETA = 11,
    CLASP_ERR_SINGLE_CLUSTER = 12,
    CLASP_ERR_BAD_K = 13,
    CLASP_ERR_DIMENSION_MISMATCH = 14,
    CLASP_ERR_PIXEL_BUDGET_EXCEEDED = 15,
    CLASP_ERR_MISSING_IMAGE_FOR_CRF = 16,
    CLASP_ERR_TOO_MANY_LABELS = 17,
    CLASP_ERR_CANNOT_PLACE_CENTERS = 18,
    CLASP_ERR_BAD_SHAPE = 19,
    CLASP_ERR_NON_FINITE_FEATURE = 20,
    CLASP_ERR_TOO_FEW_PATCHES = 21,
    CLASP_ERR_DECODE = 22,
    CLASP_ERR_INTERNAL = 99
} clasp_status;

typedef struct clasp_features clasp_features;
typedef struct clasp_image clasp_image;
typedef struct clasp_result clasp_result;

typedef struct clasp_geometry {
    int32_t orig_h;
    int32_t orig_w;
    int32_t resized_h;
    int32_t resized_w;
    int32_t rows;
    int32_t cols;
} clasp_geometry;

typedef struct clasp_features_info {
    uint32_t version;
    clasp_geometry geometry;
    int32_t dim;
    uint64_t patch_count;
} clasp_features_info;

typedef struct clasp_crf_params {
    int32_t iterations;
    double gt_prob;
    double gauss_sxy;
    double gauss_compat;
    double bilat_sxy;
    double bilat_srgb;
    double bilat_compat;
    uint64_t max_pixels;
} clasp_crf_params;

typedef struct clasp_segment_options {
    double beta;
    uint64_t seed;
    int32_t use_crf;        /* nonzero: pixel variant; zero: patch variant */
    int32_t fixed_k;        /* 0: adaptive search; >= 2: fixed cluster count */
    int32_t normalize_rows; /* row-normalize the spectral embedding */
    clasp_crf_params crf;
} clasp_segment_options;

typedef struct clasp_result_info {
    int32_t k;
    int32_t k_opt;
    int32_t elbow_index;
    int32_t degenerate_spectrum;
    double silhouette;
    int32_t mask_h;
    int32_t mask_w;
    int32_t patch_rows;
    int32_t patch_cols;
    int32_t candidate_count;
    double affinity_ms;
    double eigen_ms;
    double search_ms;
    double crf_ms;
} clasp_result_info;

typedef enum clasp_layout {
    CLASP_LAYOUT_VERTICAL_BANDS = 0,
    CLASP_LAYOUT_GRID_BLOCKS = 1
} clasp_layout;

typedef struct clasp_synth_params {
    int32_t rows;
    int32_t cols;
    int32_t k;
    int32_t dim;
    double sigma;
    double min_center_angle; /* radians */
    uint64_t seed;
    int32_t layout;          /* clasp_layout */
} clasp_synth_params;

typedef struct clasp_eval_options {
    int32_t ignore_label;    /* -1: nothing ignored */
    int32_t many_to_one;     /* nonzero: majority mapping instead of one-to-one */
    int32_t jobs;
} clasp_eval_options;

typedef struct clasp_eval_summary {
    double miou;
    double pixel_acc;
    int32_t n_images;
} clasp_eval_summary;

CLASP_API const char* clasp_version(void);
CLASP_API const char* clasp_status_name(clasp_status status);
CLASP_API const char* clasp_last_error(void);

CLASP_API clasp_status clasp_geometry_compute(int32_t orig_h, int32_t orig_w, clasp_geometry* out);

CLASP_API clasp_status clasp_features_read(const char* path, clasp_features** out);
CLASP_API clasp_status clasp_features_read_info(const char* path, clasp_features_info* out);
CLASP_API clasp_status clasp_features_create(int32_t orig_h, int32_t orig_w, int32_t dim,
                                             const float* data, size_t count, clasp_features** out);
CLASP_API clasp_status clasp_features_info_get(const clasp_features* features, clasp_features_info* out);
CLASP_API clasp_status clasp_features_write(const clasp_features* features, const char* path);
CLASP_API void clasp_features_free(clasp_features* features);

CLASP_API clasp_status clasp_image_read_png(const char* path, clasp_image** out);
CLASP_API clasp_status clasp_image_size(const clasp_image* image, int32_t* h, int32_t* w);
CLASP_API void clasp_image_free(clasp_image* image);

CLASP_API void clasp_crf_params_default(clasp_crf_params* out);
CLASP_API void clasp_segment_options_default(clasp_segment_options* out);

/* image may be NULL when use_crf is zero. */
CLASP_API clasp_status clasp_segment(const clasp_features* features, const clasp_image* image,
                                     const clasp_segment_options* options, clasp_result** out);
CLASP_API clasp_status clasp_result_info_get(const clasp_result* result, clasp_result_info* out);
/* Copies mask_h * mask_w labels (row-major); capacity is in elements. */
CLASP_API clasp_status clasp_result_copy_mask(const clasp_result* result, int32_t* out, size_t capacity);
CLASP_API clasp_status clasp_result_copy_patch_mask(const clasp_result* result, int32_t* out,
                                                    size_t capacity);
/* Palettized PNG at path plus a JSON sidecar with the extension replaced. */
CLASP_API clasp_status clasp_result_write_mask(const clasp_result* result, const char* path);
CLASP_API clasp_status clasp_result_write_spectrum(const clasp_result* result, const char* path);
CLASP_API clasp_status clasp_result_write_search(const clasp_result* result, const char* path);
CLASP_API void clasp_result_free(clasp_result* result);

CLASP_API void clasp_synth_params_default(clasp_synth_params* out);
/* labels_path may be NULL; otherwise receives the planted labels at pixel resolution. */
CLASP_API clasp_status clasp_synth_write(const clasp_synth_params* params, const char* features_path,
                                         const char* labels_path);

CLASP_API void clasp_eval_options_default(clasp_eval_options* out);
CLASP_API clasp_status clasp_evaluate_files(const char* pred_path, const char* gt_path,
                                            const clasp_eval_options* options, double* miou,
                                            double* pixel_acc);
/* Pairs every *.png in pred_dir with the same file name in gt_dir; json_path may be NULL. */
CLASP_API clasp_status clasp_evaluate_dirs(const char* pred_dir, const char* gt_dir,
                                           const clasp_eval_options* options, const char* json_path,
                                           clasp_eval_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* CLASP_CLASP_H */
