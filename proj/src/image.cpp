#include <subedge/error.hpp>
#include <subedge/image.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace subedge {

namespace {

[[noreturn]] void io_error(const std::filesystem::path& path, const std::string& what) {
    throw Error(ErrorCode::Io, path.string() + ": " + what);
}

/// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
    std::string token;
    while (true) {
        const int c = in.peek();
        if (c == EOF) {
            io_error(path, "truncated header");
        }
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string skip;
            std::getline(in, skip);
        } else {
            break;
        }
    }
    in >> token;
    if (!in) {
        io_error(path, "truncated header");
    }
    return token;
}

int parse_header_int(std::istream& in, const std::filesystem::path& path, const char* field) {
    const std::string tok = next_token(in, path);
    try {
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size() || v <= 0) {
            throw std::invalid_argument(tok);
        }
        return v;
    } catch (const std::exception&) {
        io_error(path, std::string("bad ") + field + " '" + tok + "'");
    }
}

}  // namespace

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative image size");
    }
    data_.assign(static_cast<size_t>(width) * static_cast<size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<size_t>(width) * static_cast<size_t>(height)) {
        throw Error(ErrorCode::InvalidArgument, "image data length must equal width*height");
    }
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::InvalidArgument, "image data must be finite");
    }
}

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative image size");
    }
    data_.assign(static_cast<size_t>(width) * static_cast<size_t>(height), fill);
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        io_error(path, "cannot open for reading");
    }
    const std::string magic = next_token(in, path);
    if (magic != "P5" && magic != "P2") {
        io_error(path, "not a P2/P5 PGM (magic '" + magic + "')");
    }
    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (maxval > 65535) {
        io_error(path, "maxval exceeds 65535");
    }
    const size_t count = static_cast<size_t>(width) * static_cast<size_t>(height);
    std::vector<double> data(count);

    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        const size_t bytes_per = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes_per);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<size_t>(in.gcount()) != raw.size()) {
            io_error(path, "truncated pixel data");
        }
        for (size_t i = 0; i < count; ++i) {
            const unsigned v = bytes_per == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
            data[i] = static_cast<double>(v) / maxval;
        }
    } else {
        for (size_t i = 0; i < count; ++i) {
            long v = 0;
            if (!(in >> v) || v < 0 || v > maxval) {
                io_error(path, "bad or truncated ASCII pixel data");
            }
            data[i] = static_cast<double>(v) / maxval;
        }
    }
    return GrayImage(width, height, std::move(data));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        io_error(path, "cannot open for writing");
    }
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> raw(img.data().size());
    std::transform(img.data().begin(), img.data().end(), raw.begin(), [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) {
        io_error(path, "write failed");
    }
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        io_error(path, "cannot open for writing");
    }
    out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const Rgb c = img.at(x, y);
            out.write(reinterpret_cast<const char*>(c.data()), 3);
        }
    }
    if (!out) {
        io_error(path, "write failed");
    }
}

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        io_error(path, "cannot open for reading");
    }
    if (next_token(in, path) != "P6") {
        io_error(path, "not a P6 PPM");
    }
    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    if (parse_header_int(in, path, "maxval") != 255) {
        io_error(path, "only 8-bit PPM is supported");
    }
    in.get();
    RgbImage img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            Rgb& c = img.at(x, y);
            in.read(reinterpret_cast<char*>(c.data()), 3);
        }
    }
    if (!in) {
        io_error(path, "truncated pixel data");
    }
    return img;
}

}  // namespace subedge
