#include "gmed/idx.hpp"

#include <cstdint>
#include <fstream>

namespace gmed {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
    unsigned char buf[4];
    if (!f.read(reinterpret_cast<char*>(buf), 4))
        throw IdxError(IdxError::Kind::Truncated, "truncated header in " + path);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

std::vector<unsigned char> read_payload(std::ifstream& f, std::size_t n, const std::string& path) {
    std::vector<unsigned char> bytes(n);
    if (!f.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(n)))
        throw IdxError(IdxError::Kind::Truncated, "truncated payload in " + path);
    return bytes;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgf(images_path, std::ios::binary);
    if (!imgf) throw IdxError(IdxError::Kind::Io, "cannot open " + images_path);
    std::ifstream lblf(labels_path, std::ios::binary);
    if (!lblf) throw IdxError(IdxError::Kind::Io, "cannot open " + labels_path);

    if (read_be32(imgf, images_path) != kImagesMagic)
        throw IdxError(IdxError::Kind::BadMagic, "bad image magic in " + images_path);
    const std::size_t n_images = read_be32(imgf, images_path);
    const std::size_t rows = read_be32(imgf, images_path);
    const std::size_t cols = read_be32(imgf, images_path);

    if (read_be32(lblf, labels_path) != kLabelsMagic)
        throw IdxError(IdxError::Kind::BadMagic, "bad label magic in " + labels_path);
    const std::size_t n_labels = read_be32(lblf, labels_path);

    if (n_images != n_labels)
        throw IdxError(IdxError::Kind::CountMismatch,
                       "image/label count mismatch: " + std::to_string(n_images) + " vs " +
                           std::to_string(n_labels));

    const std::size_t dim = rows * cols;
    auto pixels = read_payload(imgf, n_images * dim, images_path);
    auto labels = read_payload(lblf, n_labels, labels_path);

    Dataset ds;
    ds.x = Mat<float>(n_images, dim);
    ds.y.resize(n_images);
    ds.source_index.resize(n_images);
    for (std::size_t i = 0; i < n_images; ++i) {
        float* row = ds.x.row(i);
        const unsigned char* src = pixels.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) row[j] = float(src[j]) / 255.0f;
        ds.y[i] = int(labels[i]);
        ds.source_index[i] = int(i);
    }
    return ds;
}

}  // namespace gmed
