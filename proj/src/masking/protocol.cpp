#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include <openssl/evp.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hsi/common/error.hpp"
#include "hsi/masking/protocol.hpp"

namespace hsi {

using nlohmann::json;
static_assert(std::endian::native == std::endian::little, "float payloads assume a little-endian host");

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(n);
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw ValidationError("base64: length is not a multiple of 4");
    std::vector<std::uint8_t> out(text.size() / 4 * 3);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw ValidationError("base64: invalid character");
    size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(n - pad);
    return out;
}

namespace {

int dim(const json& j, const char* key) {
    const int v = j.at(key).get<int>();
    if (v <= 0 || v > (1 << 16)) throw ValidationError(std::string("protocol: bad ") + key);
    return v;
}

std::vector<std::uint8_t> floats_to_bytes(const std::vector<float>& v) {
    std::vector<std::uint8_t> b(v.size() * 4);
    std::memcpy(b.data(), v.data(), b.size());
    return b;
}

std::vector<float> bytes_to_floats(const std::vector<std::uint8_t>& b, size_t expect) {
    if (b.size() != expect * 4) throw ValidationError("protocol: float payload has the wrong length");
    std::vector<float> v(expect);
    std::memcpy(v.data(), b.data(), b.size());
    return v;
}

}  // namespace

json encode_image(const RgbImage& img) {
    std::vector<std::uint8_t> b;
    b.reserve(img.data.size() * 3);
    for (const Rgb& p : img.data) b.insert(b.end(), p.begin(), p.end());
    return {{"width", img.width}, {"height", img.height}, {"rgb", base64_encode(b)}};
}

RgbImage decode_image(const json& j) {
    RgbImage img(dim(j, "width"), dim(j, "height"));
    const auto b = base64_decode(j.at("rgb").get<std::string>());
    if (b.size() != img.data.size() * 3) throw ValidationError("protocol: image payload has the wrong length");
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = {b[3 * i], b[3 * i + 1], b[3 * i + 2]};
    return img;
}

json encode_mask(const Mask& m) {
    const int stride = (m.width + 7) / 8;
    std::vector<std::uint8_t> b(static_cast<size_t>(stride) * m.height, 0);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m(x, y)) b[static_cast<size_t>(y) * stride + x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    return {{"width", m.width}, {"height", m.height}, {"bits", base64_encode(b)}};
}

Mask decode_mask(const json& j) {
    Mask m(dim(j, "width"), dim(j, "height"), 0);
    const int stride = (m.width + 7) / 8;
    const auto b = base64_decode(j.at("bits").get<std::string>());
    if (b.size() != static_cast<size_t>(stride) * m.height) throw ValidationError("protocol: mask payload has the wrong length");
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) m(x, y) = (b[static_cast<size_t>(y) * stride + x / 8] >> (7 - x % 8)) & 1;
    return m;
}

json encode_latent(const Latent& z) {
    return {{"width", z.width}, {"height", z.height}, {"channels", z.channels}, {"data", base64_encode(floats_to_bytes(z.data))}};
}

Latent decode_latent(const json& j) {
    Latent z;
    z.width = dim(j, "width");
    z.height = dim(j, "height");
    z.channels = dim(j, "channels");
    z.data = bytes_to_floats(base64_decode(j.at("data").get<std::string>()),
                             static_cast<size_t>(z.width) * z.height * z.channels);
    return z;
}

json encode_attention(const AttentionMap& a) {
    return {{"width", a.width}, {"height", a.height}, {"tokens", a.tokens}, {"values", base64_encode(floats_to_bytes(a.values))}};
}

AttentionMap decode_attention(const json& j) {
    AttentionMap a(dim(j, "width"), dim(j, "height"), dim(j, "tokens"));
    a.values = bytes_to_floats(base64_decode(j.at("values").get<std::string>()), a.values.size());
    return a;
}

int serve_protocol(InpaintBackend& backend, std::istream& in, std::ostream& out) {
    int handled = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++handled;
        json reply;
        bool stop = false;
        try {
            const json req = json::parse(line);
            const std::string op = req.at("op").get<std::string>();
            if (op == "hello") {
                const int v = req.at("version").get<int>();
                if (v != kProtocolVersion)
                    throw ValidationError("protocol version mismatch: got " + std::to_string(v) + ", serving " +
                                          std::to_string(kProtocolVersion));
                reply = {{"status", "ok"}, {"version", kProtocolVersion}};
            } else if (op == "init") {
                const Latent z = backend.init_latent(decode_image(req.at("image")), req.at("seed").get<std::uint64_t>());
                reply = {{"status", "ok"}, {"latent", encode_latent(z)}};
            } else if (op == "step") {
                const StepOutput o = backend.denoise_step(decode_latent(req.at("latent")), decode_mask(req.at("mask")),
                                                          decode_image(req.at("image")), req.value("prompt", std::string()),
                                                          req.at("t").get<int>());
                json att = json::array();
                for (const AttentionMap& a : o.attention) att.push_back(encode_attention(a));
                reply = {{"status", "ok"}, {"latent", encode_latent(o.latent)}, {"attention", att}};
            } else if (op == "decode") {
                reply = {{"status", "ok"}, {"image", encode_image(backend.decode(decode_latent(req.at("latent"))))}};
            } else if (op == "bye") {
                reply = {{"status", "ok"}};
                stop = true;
            } else {
                throw ValidationError("unknown op '" + op + "'");
            }
        } catch (const std::exception& e) {
            reply = {{"status", "error"}, {"message", e.what()}};
        }
        out << reply.dump() << '\n' << std::flush;
        if (stop) break;
    }
    return handled;
}

// --- client ---------------------------------------------------------------

ProcessBackend::ProcessBackend(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ValidationError("backend command is empty");
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw IoError("pipe() failed");
    pid_ = fork();
    if (pid_ < 0) throw IoError("fork() failed");
    if (pid_ == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    to_ = fdopen(to_child[1], "w");
    from_ = fdopen(from_child[0], "r");
    const json r = call({{"op", "hello"}, {"version", kProtocolVersion}});
    if (r.value("status", "") != "ok") throw BackendError("backend handshake failed: " + r.value("message", ""), -1);
}

ProcessBackend::~ProcessBackend() {
    if (to_) {
        std::fputs("{\"op\":\"bye\"}\n", to_);
        std::fclose(to_);
    }
    if (from_) std::fclose(from_);
    if (pid_ > 0) waitpid(pid_, nullptr, 0);
}

json ProcessBackend::call(const json& request) {
    const std::string line = request.dump() + "\n";
    if (std::fputs(line.c_str(), to_) < 0 || std::fflush(to_) != 0) throw BackendError("backend process is gone", -1);
    char* buf = nullptr;
    size_t cap = 0;
    const ssize_t n = getline(&buf, &cap, from_);
    std::string reply = n > 0 ? std::string(buf, n) : std::string();
    std::free(buf);
    if (n <= 0) throw BackendError("backend process closed its output", -1);
    try {
        return json::parse(reply);
    } catch (const json::exception& e) {
        throw BackendError(std::string("backend sent malformed reply: ") + e.what(), -1);
    }
}

namespace {

const json& ok(const json& r) {
    if (r.value("status", "") != "ok") throw BackendError("backend error: " + r.value("message", std::string("?")), -1);
    return r;
}

}  // namespace

Latent ProcessBackend::init_latent(const RgbImage& image, std::uint64_t seed) {
    return decode_latent(ok(call({{"op", "init"}, {"seed", seed}, {"image", encode_image(image)}})).at("latent"));
}

StepOutput ProcessBackend::denoise_step(const Latent& z, const Mask& mask, const RgbImage& image, const std::string& prompt,
                                        int t) {
    const json r = ok(call({{"op", "step"},
                            {"t", t},
                            {"prompt", prompt},
                            {"mask", encode_mask(mask)},
                            {"image", encode_image(image)},
                            {"latent", encode_latent(z)}}));
    StepOutput o;
    o.latent = decode_latent(r.at("latent"));
    for (const json& a : r.at("attention")) o.attention.push_back(decode_attention(a));
    return o;
}

RgbImage ProcessBackend::decode(const Latent& z) {
    return decode_image(ok(call({{"op", "decode"}, {"latent", encode_latent(z)}})).at("image"));
}

}  // namespace hsi
