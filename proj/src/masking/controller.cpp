#include <cmath>
#include <random>

#include "hsi/common/error.hpp"
#include "hsi/masking/controller.hpp"

namespace hsi {

void MaskingConfig::validate() const {
    if (!(T > T_min && T_min >= 1)) throw ValidationError("masking: need T > T_min >= 1");
    if (token_indices.empty()) throw ValidationError("masking: empty token set");
    if (!std::isfinite(threshold)) throw ValidationError("masking: threshold must be finite");
    if (latent_width <= 0 || latent_height <= 0) throw ValidationError("masking: bad latent size");
}

namespace {

template <class Fn>
auto at_step(int t, Fn&& fn) {
    try {
        return fn();
    } catch (const BackendError& e) {
        if (e.step() >= 0) throw;
        throw BackendError(std::string("backend failed at step ") + std::to_string(t) + ": " + e.what(), t);
    } catch (const std::exception& e) {
        throw BackendError(std::string("backend failed at step ") + std::to_string(t) + ": " + e.what(), t);
    }
}

}  // namespace

InpaintResult run_inpaint_loop(InpaintBackend& backend, const RgbImage& image, const std::string& prompt,
                               const MaskingConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    InpaintResult r;
    r.masks.assign(cfg.T + 1, Mask());
    r.masks[cfg.T] = Mask(cfg.latent_width, cfg.latent_height, 0);

    Latent z = at_step(cfg.T, [&] { return backend.init_latent(image, seed); });
    for (int t = cfg.T; t >= 1; --t) {
        StepOutput o = at_step(t, [&] { return backend.denoise_step(z, r.masks[t], image, prompt, t); });
        z = std::move(o.latent);
        if (t > cfg.T_min) {
            r.masks[t - 1] = at_step(t, [&] {
                const AttentionMap att = average_layers(o.attention);
                att.validate(1e-3);
                return mask_from_attention(att, cfg.token_indices, cfg.threshold, cfg.latent_width, cfg.latent_height);
            });
            ++r.updates;
        } else {
            r.masks[t - 1] = r.masks[t];
        }
    }
    r.image = at_step(0, [&] { return backend.decode(z); });
    r.final_mask = r.masks[0];
    return r;
}

// --- mock -----------------------------------------------------------------

Latent MockInpaintBackend::init_latent(const RgbImage& image, std::uint64_t seed) {
    Latent z;
    z.width = std::max(1, image.width / 8);
    z.height = std::max(1, image.height / 8);
    z.channels = 4;
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n(0.0f, 1.0f);
    z.data.resize(static_cast<size_t>(z.width) * z.height * z.channels);
    for (float& v : z.data) v = n(rng);
    T_ = -1;
    return z;
}

AttentionMap MockInpaintBackend::attention_at(int t, int layer) const {
    const int n = opt_.att_size;
    AttentionMap a(n, n, opt_.tokens);
    const int T = T_ < 0 ? t : T_;
    std::vector<bool> is_blob(opt_.tokens, false);
    for (const Blob& b : opt_.blobs) is_blob.at(b.token) = true;
    int others = 0;
    for (bool f : is_blob) others += !f;
    const double amp = 0.9 / std::max<size_t>(1, opt_.blobs.size());
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double used = 0;
            std::vector<double> row(opt_.tokens, 0.0);
            for (const Blob& b : opt_.blobs) {
                const double cx = b.cx + opt_.drift * (T - t);
                const double sg = b.sigma * (1.0 + 0.1 * layer);
                const double d2 = (x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - b.cy) * (y + 0.5 - b.cy);
                const double g = amp * std::exp(-d2 / (2 * sg * sg));
                row[b.token] += g;
                used += g;
            }
            for (int k = 0; k < opt_.tokens; ++k) {
                if (!is_blob[k]) row[k] = (1.0 - used) / others;
                a.at(x, y, k) = static_cast<float>(row[k]);
            }
        }
    return a;
}

StepOutput MockInpaintBackend::denoise_step(const Latent& z, const Mask& mask, const RgbImage& image,
                                            const std::string&, int t) {
    if (t == opt_.fail_at) throw std::runtime_error("scripted failure");
    if (T_ < 0) T_ = t;
    StepOutput o;
    o.latent = z;
    for (int y = 0; y < z.height; ++y)
        for (int x = 0; x < z.width; ++x) {
            const int mx = mask.empty() ? 0 : std::min(mask.width - 1, x * mask.width / z.width);
            const int my = mask.empty() ? 0 : std::min(mask.height - 1, y * mask.height / z.height);
            const bool inside = !mask.empty() && mask(mx, my);
            const int ix = std::min(image.width - 1, x * 8 + 4), iy = std::min(image.height - 1, y * 8 + 4);
            for (int c = 0; c < z.channels; ++c) {
                const float target = inside ? (c == 0 ? 0.9f : 0.2f) : (c < 3 ? image(ix, iy)[c] / 255.0f : 0.0f);
                float& v = o.latent.data[(static_cast<size_t>(y) * z.width + x) * z.channels + c];
                v = 0.8f * v + 0.2f * target;
            }
        }
    for (int l = 0; l < opt_.layers; ++l) o.attention.push_back(attention_at(t, l));
    return o;
}

RgbImage MockInpaintBackend::decode(const Latent& z) {
    RgbImage img(z.width * 8, z.height * 8, Rgb{0, 0, 0});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3 && c < z.channels; ++c) {
                const float v = z.data[(static_cast<size_t>(y / 8) * z.width + x / 8) * z.channels + c];
                img(x, y)[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
            }
    return img;
}

}  // namespace hsi
