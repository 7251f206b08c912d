#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hsi/common/image.hpp"
#include "hsi/masking/attention.hpp"

namespace hsi {

using Rgb = std::array<std::uint8_t, 3>;
using RgbImage = Image<Rgb>;

struct Latent {
    int width = 0, height = 0, channels = 0;
    std::vector<float> data;

    bool operator==(const Latent&) const = default;
};

struct StepOutput {
    Latent latent;
    std::vector<AttentionMap> attention;  // one or more layers, averaged by the controller
};

// Denoising inpainting model seen by the controller.
class InpaintBackend {
public:
    virtual ~InpaintBackend() = default;
    virtual Latent init_latent(const RgbImage& image, std::uint64_t seed) = 0;
    virtual StepOutput denoise_step(const Latent& z, const Mask& mask, const RgbImage& image, const std::string& prompt,
                                    int t) = 0;
    virtual RgbImage decode(const Latent& z) = 0;
};

struct MaskingConfig {
    int T = 50;
    int T_min = 25;
    std::vector<int> token_indices = {1};  // tokens referring to the human
    double threshold = 0.5;
    int latent_width = 64;
    int latent_height = 64;

    void validate() const;
};

struct InpaintResult {
    RgbImage image;
    Mask final_mask;
    std::vector<Mask> masks;  // masks[t] = M_t for t = 0..T
    int updates = 0;
};

// Dynamic masking: M_T is empty; after the step at t the mask is re-derived
// from that step's attention while t > T_min, and frozen afterwards.
// Backend exceptions are rethrown as BackendError carrying t.
InpaintResult run_inpaint_loop(InpaintBackend& backend, const RgbImage& image, const std::string& prompt,
                               const MaskingConfig& cfg, std::uint64_t seed);

// Scripted stand-in: Gaussian-blob attention for the human tokens (the rest
// of each row spread evenly over the other tokens), latents that drift
// toward a flat color inside the mask.
class MockInpaintBackend : public InpaintBackend {
public:
    struct Blob {
        double cx, cy, sigma;  // in attention-grid pixels
        int token;
    };
    struct Options {
        int att_size = 16;
        int tokens = 8;
        std::vector<Blob> blobs = {{8.0, 8.0, 2.5, 1}};
        double drift = 0.0;  // blob centers move by drift * (T - t) grid pixels in x
        int layers = 2;
        int fail_at = -1;    // throw at this t (testing)
    };

    MockInpaintBackend() = default;
    explicit MockInpaintBackend(Options o) : opt_(std::move(o)) {}

    Latent init_latent(const RgbImage& image, std::uint64_t seed) override;
    StepOutput denoise_step(const Latent& z, const Mask& mask, const RgbImage& image, const std::string& prompt,
                            int t) override;
    RgbImage decode(const Latent& z) override;

    AttentionMap attention_at(int t, int layer) const;

private:
    Options opt_;
    int T_ = -1;  // first t seen
};

}  // namespace hsi
