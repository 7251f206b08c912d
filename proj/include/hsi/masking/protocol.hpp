#pragma once

#include <cstdio>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "hsi/masking/controller.hpp"

namespace hsi {

// Line-delimited backend protocol: one JSON object per line each way.
//   {"op":"hello","version":1}                       -> {"status":"ok","version":1}
//   {"op":"init","seed":s,"image":IMG}               -> {"status":"ok","latent":LAT}
//   {"op":"step","t":t,"prompt":p,"mask":MASK,"image":IMG,"latent":LAT}
//                                                    -> {"status":"ok","latent":LAT,"attention":[ATT...]}
//   {"op":"decode","latent":LAT}                     -> {"status":"ok","image":IMG}
//   {"op":"bye"}                                     -> {"status":"ok"} and the server stops
// Failures answer {"status":"error","message":...} and the server keeps going.
// IMG  = {"width","height","rgb": base64 of row-major RGB bytes}
// MASK = {"width","height","bits": base64 of row-major bits, MSB first, rows padded to bytes}
// LAT  = {"width","height","channels","data": base64 of little-endian float32}
// ATT  = {"width","height","tokens","values": base64 of little-endian float32, pixel-major}
inline constexpr int kProtocolVersion = 1;

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);  // throws ValidationError

nlohmann::json encode_image(const RgbImage& img);
RgbImage decode_image(const nlohmann::json& j);
nlohmann::json encode_mask(const Mask& m);
Mask decode_mask(const nlohmann::json& j);
nlohmann::json encode_latent(const Latent& z);
Latent decode_latent(const nlohmann::json& j);
nlohmann::json encode_attention(const AttentionMap& a);
AttentionMap decode_attention(const nlohmann::json& j);

// Answers requests from `in` until "bye" or end of input. Returns the number
// of requests handled.
int serve_protocol(InpaintBackend& backend, std::istream& in, std::ostream& out);

// Client side: a backend living in a child process speaking the protocol on
// its stdin/stdout. The handshake runs in the constructor.
class ProcessBackend : public InpaintBackend {
public:
    explicit ProcessBackend(const std::vector<std::string>& argv);
    ~ProcessBackend() override;
    ProcessBackend(const ProcessBackend&) = delete;
    ProcessBackend& operator=(const ProcessBackend&) = delete;

    Latent init_latent(const RgbImage& image, std::uint64_t seed) override;
    StepOutput denoise_step(const Latent& z, const Mask& mask, const RgbImage& image, const std::string& prompt,
                            int t) override;
    RgbImage decode(const Latent& z) override;

    // Raw request/response, exposed for conformance checks.
    nlohmann::json call(const nlohmann::json& request);

private:
    int pid_ = -1;
    std::FILE* to_ = nullptr;
    std::FILE* from_ = nullptr;
};

}  // namespace hsi
