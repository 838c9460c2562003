#include "clasp/clasp.h"

#include "clasp/error.hpp"
#include "clasp/feature_io.hpp"
#include "clasp/image_io.hpp"
#include "clasp/metrics.hpp"
#include "clasp/pipeline.hpp"
#include "clasp/synth.hpp"
#include "file_util.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <string>

struct clasp_features {
    clasp::PatchFeatureGrid grid;
};

struct clasp_image {
    clasp::RgbImage image;
};

struct clasp_result {
    clasp::SegmentationResult result;
    clasp::PipelineConfig config;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
clasp_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return CLASP_OK;
    } catch (const clasp::Error& e) {
        g_last_error = e.what();
        return static_cast<clasp_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CLASP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CLASP_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CLASP_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) {
        clasp::fail(clasp::ErrorCode::InvalidArgument, what);
    }
}

clasp_geometry to_c(const clasp::ImageGeometry& g) {
    return {g.orig_h, g.orig_w, g.resized_h, g.resized_w, g.rows(), g.cols()};
}

clasp::CrfConfig from_c(const clasp_crf_params& p) {
    clasp::CrfConfig c;
    c.iterations = p.iterations;
    c.gt_prob = p.gt_prob;
    c.gauss_sxy = p.gauss_sxy;
    c.gauss_compat = p.gauss_compat;
    c.bilat_sxy = p.bilat_sxy;
    c.bilat_srgb = p.bilat_srgb;
    c.bilat_compat = p.bilat_compat;
    c.max_pixels = static_cast<std::size_t>(p.max_pixels);
    return c;
}

clasp::PipelineConfig from_c(const clasp_segment_options& o) {
    clasp::PipelineConfig c;
    c.beta = o.beta;
    c.seed = o.seed;
    c.crf = o.use_crf != 0;
    if (o.fixed_k != 0) {
        c.fixed_k = o.fixed_k;
    }
    c.normalize_rows = o.normalize_rows != 0;
    c.crf_config = from_c(o.crf);
    return c;
}

void copy_labels(const clasp::LabelMask& mask, int32_t* out, size_t capacity) {
    require(out != nullptr, "output buffer is null");
    if (capacity < mask.labels.size()) {
        clasp::fail(clasp::ErrorCode::DimensionMismatch,
                    "buffer holds " + std::to_string(capacity) + " labels, need " +
                        std::to_string(mask.labels.size()));
    }
    for (size_t i = 0; i < mask.labels.size(); ++i) {
        out[i] = mask.labels[i];
    }
}

}  // namespace

extern "C" {

const char* clasp_version(void) {
    return "0.1.0";
}

const char* clasp_status_name(clasp_status status) {
    return clasp::error_name(static_cast<clasp::ErrorCode>(status));
}

const char* clasp_last_error(void) {
    return g_last_error.c_str();
}

clasp_status clasp_geometry_compute(int32_t orig_h, int32_t orig_w, clasp_geometry* out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        *out = to_c(clasp::compute_geometry(orig_h, orig_w));
    });
}

clasp_status clasp_features_read(const char* path, clasp_features** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        *out = new clasp_features{clasp::read_features(path)};
    });
}

clasp_status clasp_features_read_info(const char* path, clasp_features_info* out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        const auto h = clasp::read_feature_header(path);
        out->version = h.version;
        out->geometry = to_c(clasp::compute_geometry(static_cast<int>(h.orig_h), static_cast<int>(h.orig_w)));
        out->dim = static_cast<int32_t>(h.dim);
        out->patch_count = static_cast<uint64_t>(h.rows) * h.cols;
    });
}

clasp_status clasp_features_create(int32_t orig_h, int32_t orig_w, int32_t dim, const float* data,
                                   size_t count, clasp_features** out) {
    return guarded([&] {
        require(out != nullptr && (data != nullptr || count == 0), "null argument");
        *out = nullptr;
        std::vector<float> values(data, data + count);
        *out = new clasp_features{
            clasp::PatchFeatureGrid(clasp::compute_geometry(orig_h, orig_w), dim, std::move(values))};
    });
}

clasp_status clasp_features_info_get(const clasp_features* features, clasp_features_info* out) {
    return guarded([&] {
        require(features != nullptr && out != nullptr, "null argument");
        out->version = clasp::kFeatureVersion;
        out->geometry = to_c(features->grid.geometry());
        out->dim = features->grid.dim();
        out->patch_count = features->grid.patch_count();
    });
}

clasp_status clasp_features_write(const clasp_features* features, const char* path) {
    return guarded([&] {
        require(features != nullptr && path != nullptr, "null argument");
        clasp::write_features(features->grid, path);
    });
}

void clasp_features_free(clasp_features* features) {
    delete features;
}

clasp_status clasp_image_read_png(const char* path, clasp_image** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        *out = new clasp_image{clasp::read_rgb_png(path)};
    });
}

clasp_status clasp_image_size(const clasp_image* image, int32_t* h, int32_t* w) {
    return guarded([&] {
        require(image != nullptr && h != nullptr && w != nullptr, "null argument");
        *h = image->image.h;
        *w = image->image.w;
    });
}

void clasp_image_free(clasp_image* image) {
    delete image;
}

void clasp_crf_params_default(clasp_crf_params* out) {
    if (out == nullptr) {
        return;
    }
    const clasp::CrfConfig c;
    out->iterations = c.iterations;
    out->gt_prob = c.gt_prob;
    out->gauss_sxy = c.gauss_sxy;
    out->gauss_compat = c.gauss_compat;
    out->bilat_sxy = c.bilat_sxy;
    out->bilat_srgb = c.bilat_srgb;
    out->bilat_compat = c.bilat_compat;
    out->max_pixels = c.max_pixels;
}

void clasp_segment_options_default(clasp_segment_options* out) {
    if (out == nullptr) {
        return;
    }
    const clasp::PipelineConfig c;
    out->beta = c.beta;
    out->seed = c.seed;
    out->use_crf = c.crf ? 1 : 0;
    out->fixed_k = 0;
    out->normalize_rows = c.normalize_rows ? 1 : 0;
    clasp_crf_params_default(&out->crf);
}

clasp_status clasp_segment(const clasp_features* features, const clasp_image* image,
                           const clasp_segment_options* options, clasp_result** out) {
    return guarded([&] {
        require(features != nullptr && options != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        const auto cfg = from_c(*options);
        auto result = clasp::segment(features->grid, image ? &image->image : nullptr, cfg);
        *out = new clasp_result{std::move(result), cfg};
    });
}

clasp_status clasp_result_info_get(const clasp_result* result, clasp_result_info* out) {
    return guarded([&] {
        require(result != nullptr && out != nullptr, "null argument");
        const auto& r = result->result;
        *out = {};
        out->k = r.k;
        out->k_opt = r.spectrum.k_opt;
        out->elbow_index = r.spectrum.elbow_index;
        out->degenerate_spectrum = r.spectrum.degenerate ? 1 : 0;
        out->silhouette = r.silhouette;
        out->mask_h = r.mask.h;
        out->mask_w = r.mask.w;
        out->patch_rows = r.patch_mask.h;
        out->patch_cols = r.patch_mask.w;
        out->candidate_count = static_cast<int32_t>(r.search.candidates.size());
        out->affinity_ms = r.timings.affinity_ms;
        out->eigen_ms = r.timings.eigen_ms;
        out->search_ms = r.timings.search_ms;
        out->crf_ms = r.timings.crf_ms;
    });
}

clasp_status clasp_result_copy_mask(const clasp_result* result, int32_t* out, size_t capacity) {
    return guarded([&] {
        require(result != nullptr, "null argument");
        copy_labels(result->result.mask, out, capacity);
    });
}

clasp_status clasp_result_copy_patch_mask(const clasp_result* result, int32_t* out, size_t capacity) {
    return guarded([&] {
        require(result != nullptr, "null argument");
        copy_labels(result->result.patch_mask, out, capacity);
    });
}

clasp_status clasp_result_write_mask(const clasp_result* result, const char* path) {
    return guarded([&] {
        require(result != nullptr && path != nullptr, "null argument");
        clasp::render_mask(result->result, result->config, path);
    });
}

clasp_status clasp_result_write_spectrum(const clasp_result* result, const char* path) {
    return guarded([&] {
        require(result != nullptr && path != nullptr, "null argument");
        clasp::EigenSystem eig;
        eig.eigenvalues = result->result.eigenvalues;
        clasp::detail::write_file_atomic(path, clasp::spectrum_json(eig, result->result.spectrum) + "\n");
    });
}

clasp_status clasp_result_write_search(const clasp_result* result, const char* path) {
    return guarded([&] {
        require(result != nullptr && path != nullptr, "null argument");
        clasp::detail::write_file_atomic(path, clasp::search_json(result->result.search) + "\n");
    });
}

void clasp_result_free(clasp_result* result) {
    delete result;
}

void clasp_synth_params_default(clasp_synth_params* out) {
    if (out == nullptr) {
        return;
    }
    const clasp::PlantedSpec s;
    out->rows = s.rows;
    out->cols = s.cols;
    out->k = s.k_true;
    out->dim = s.dim;
    out->sigma = s.noise_sigma;
    out->min_center_angle = s.min_center_angle;
    out->seed = s.seed;
    out->layout = CLASP_LAYOUT_VERTICAL_BANDS;
}

clasp_status clasp_synth_write(const clasp_synth_params* params, const char* features_path,
                               const char* labels_path) {
    return guarded([&] {
        require(params != nullptr && features_path != nullptr, "null argument");
        require(params->layout == CLASP_LAYOUT_VERTICAL_BANDS || params->layout == CLASP_LAYOUT_GRID_BLOCKS,
                "unknown layout");
        clasp::PlantedSpec spec;
        spec.rows = params->rows;
        spec.cols = params->cols;
        spec.k_true = params->k;
        spec.dim = params->dim;
        spec.noise_sigma = params->sigma;
        spec.min_center_angle = params->min_center_angle;
        spec.seed = params->seed;
        spec.layout = params->layout == CLASP_LAYOUT_GRID_BLOCKS ? clasp::PlantedLayout::GridBlocks
                                                                 : clasp::PlantedLayout::VerticalBands;
        const auto inst = clasp::generate_planted(spec);
        if (labels_path != nullptr) {
            clasp::write_label_png(clasp::upsample_labels(inst.labels, inst.grid.geometry()), labels_path);
        }
        clasp::write_features(inst.grid, features_path);
    });
}

void clasp_eval_options_default(clasp_eval_options* out) {
    if (out == nullptr) {
        return;
    }
    out->ignore_label = 255;
    out->many_to_one = 0;
    out->jobs = 1;
}

clasp_status clasp_evaluate_files(const char* pred_path, const char* gt_path,
                                  const clasp_eval_options* options, double* miou, double* pixel_acc) {
    return guarded([&] {
        require(pred_path != nullptr && gt_path != nullptr && options != nullptr, "null argument");
        const auto r = clasp::evaluate(clasp::read_label_png(pred_path), clasp::read_label_png(gt_path),
                                       options->ignore_label,
                                       options->many_to_one ? clasp::MatchMode::ManyToOne
                                                            : clasp::MatchMode::OneToOne);
        if (miou != nullptr) {
            *miou = r.miou;
        }
        if (pixel_acc != nullptr) {
            *pixel_acc = r.pixel_acc;
        }
    });
}

clasp_status clasp_evaluate_dirs(const char* pred_dir, const char* gt_dir, const clasp_eval_options* options,
                                 const char* json_path, clasp_eval_summary* out) {
    return guarded([&] {
        require(pred_dir != nullptr && gt_dir != nullptr && options != nullptr, "null argument");
        const auto records = clasp::evaluate_directories(
            pred_dir, gt_dir, options->ignore_label,
            options->many_to_one ? clasp::MatchMode::ManyToOne : clasp::MatchMode::OneToOne, options->jobs);
        const auto json = clasp::evaluation_json(records);
        if (json_path != nullptr) {
            clasp::detail::write_file_atomic(json_path, json);
        }
        if (out != nullptr) {
            const auto parsed_miou = [&] {
                double s = 0.0;
                for (const auto& r : records) {
                    s += r.result.miou;
                }
                return records.empty() ? 0.0 : s / static_cast<double>(records.size());
            }();
            std::int64_t correct = 0;
            std::int64_t valid = 0;
            for (const auto& r : records) {
                correct += r.result.correct;
                valid += r.result.valid;
            }
            out->miou = parsed_miou;
            out->pixel_acc = valid > 0 ? static_cast<double>(correct) / static_cast<double>(valid) : 0.0;
            out->n_images = static_cast<int32_t>(records.size());
        }
    });
}

}  // extern "C"
