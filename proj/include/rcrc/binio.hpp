#pragma once

// Little-endian binary encoding helpers shared by checkpoints and the
// optimizer state blob.

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace rcrc::binio {

static_assert(std::endian::native == std::endian::little || true,
              "byte order handled explicitly below");

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }
    void raw(const std::string& s) { buf_.append(s); }
    void vec(const Eigen::VectorXd& v) {
        u64(static_cast<std::uint64_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
    }
    void mat(const Eigen::MatrixXd& m) {  // row-major element order
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }

    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    std::uint8_t u8() { return byte(); }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        return raw(n);
    }
    std::string raw(std::size_t n) {
        require(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    Eigen::VectorXd vec() {
        const std::uint64_t n = u64();
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (std::uint64_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = f64();
        return v;
    }
    Eigen::MatrixXd mat() {
        const std::uint64_t rows = u64();
        const std::uint64_t cols = u64();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::uint64_t r = 0; r < rows; ++r)
            for (std::uint64_t c = 0; c < cols; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f64();
        return m;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

private:
    std::uint8_t byte() {
        require(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    void require(std::size_t n) const {
        if (data_.size() - pos_ < n)
            throw std::runtime_error("binio::Reader: truncated input (need " +
                                     std::to_string(n) + " more bytes, have " +
                                     std::to_string(data_.size() - pos_) + ")");
    }

    std::string data_;
    std::size_t pos_ = 0;
};

}  // namespace rcrc::binio
