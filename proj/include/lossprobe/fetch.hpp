// fetch.hpp — opt-in download of the four canonical MNIST IDX files over
// HTTPS, with MD5 verification of the compressed payloads before anything is
// written.  Network access happens only inside fetch_mnist.
#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>
#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lossprobe {

class FetchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChecksumMismatchError : public FetchError {
public:
    ChecksumMismatchError(const std::string& file, const std::string& expected,
                          const std::string& got)
        : FetchError(file + ": checksum mismatch (expected " + expected + ", got " + got + ")") {}
};

struct MnistFile {
    const char* gz_name;
    const char* out_name;
    const char* md5;  // of the compressed payload
};

inline constexpr MnistFile kMnistFiles[4] = {
    {"train-images-idx3-ubyte.gz", "train-images-idx3-ubyte", "f68b3c2dcbeaaa9fbdd348bbdeb94873"},
    {"train-labels-idx1-ubyte.gz", "train-labels-idx1-ubyte", "d53e105ee54ea40749a09fcbcd1e9432"},
    {"t10k-images-idx3-ubyte.gz", "t10k-images-idx3-ubyte", "9fb629c4189551a2d022fa330f9573f3"},
    {"t10k-labels-idx1-ubyte.gz", "t10k-labels-idx1-ubyte", "ec29112dd5afa0611ce80d1b7f02629c"},
};

inline constexpr const char* kDefaultMnistBaseUrl =
    "https://ossci-datasets.s3.amazonaws.com/mnist/";

inline std::string md5_hex(const unsigned char* data, std::size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(data, len, digest, &digest_len, EVP_md5(), nullptr) != 1)
        throw FetchError("MD5 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * digest_len);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

inline std::vector<unsigned char> gunzip(const unsigned char* data, std::size_t len) {
    z_stream zs{};
    // 15 window bits + 16 selects gzip framing
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw FetchError("zlib init failed");
    zs.next_in = const_cast<unsigned char*>(data);
    zs.avail_in = static_cast<uInt>(len);

    std::vector<unsigned char> out;
    unsigned char chunk[1 << 16];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk;
        zs.avail_out = sizeof chunk;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FetchError("gzip decompression failed");
        }
        out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw FetchError("gzip stream truncated");
        }
    }
    inflateEnd(&zs);
    return out;
}

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // leading and trailing slash
};

inline ParsedUrl split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw FetchError("base URL must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.origin = url;
        parsed.path = "/";
    } else {
        parsed.origin = url.substr(0, path_start);
        parsed.path = url.substr(path_start);
        if (parsed.path.back() != '/') parsed.path += '/';
    }
    return parsed;
}

// Downloads any of the four files missing from dir, verifies each gz against
// its known MD5, and stores the decompressed IDX files under their canonical
// names.  Returns the number of files downloaded.
inline int fetch_mnist(const std::string& dir, const std::string& base_url = kDefaultMnistBaseUrl,
                       std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const ParsedUrl url = split_base_url(base_url);

    httplib::Client client(url.origin);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    int downloaded = 0;
    for (const MnistFile& file : kMnistFiles) {
        const fs::path out_path = fs::path(dir) / file.out_name;
        if (fs::exists(out_path)) {
            if (log) *log << file.out_name << ": present, skipping\n";
            continue;
        }
        const std::string remote = url.path + file.gz_name;
        if (log) *log << "fetching " << url.origin << remote << "\n";
        auto res = client.Get(remote);
        if (!res) throw FetchError(std::string(file.gz_name) + ": request failed (" +
                                   httplib::to_string(res.error()) + ")");
        if (res->status != 200)
            throw FetchError(std::string(file.gz_name) + ": HTTP " +
                             std::to_string(res->status));

        const auto* bytes = reinterpret_cast<const unsigned char*>(res->body.data());
        const std::string digest = md5_hex(bytes, res->body.size());
        if (digest != file.md5) throw ChecksumMismatchError(file.gz_name, file.md5, digest);

        const std::vector<unsigned char> raw = gunzip(bytes, res->body.size());
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw FetchError("cannot write " + out_path.string());
        out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size()));
        if (!out) throw FetchError("write failed for " + out_path.string());
        if (log) *log << file.out_name << ": " << raw.size() << " bytes\n";
        ++downloaded;
    }
    return downloaded;
}

}  // namespace lossprobe
