#include "hardy/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

namespace hardy {

namespace {

bool is_pow2(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

int ilog2(std::int64_t v) {
    int l = 0;
    while ((std::int64_t{1} << l) < v) ++l;
    return l;
}

} // namespace

Grid::Grid(int n, std::int64_t n_g, double length) : n_(n), ng_(n_g), length_(length) {
    if (n != 1 && n != 2) throw std::invalid_argument("Grid: dimension must be 1 or 2");
    if (!is_pow2(n_g) || n_g < 8)
        throw std::invalid_argument("Grid: N_g must be a power of two and at least 8");
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("Grid: period L must be positive and finite");
    log2_ng_ = ilog2(n_g);
}

double Grid::cell_measure() const {
    const double h = mesh();
    return n_ == 1 ? h : h * h;
}

std::int64_t Grid::size() const { return n_ == 1 ? ng_ : ng_ * ng_; }

std::int64_t Grid::index(std::array<std::int64_t, 2> m) const {
    auto wrap = [this](std::int64_t v) {
        v %= ng_;
        return v < 0 ? v + ng_ : v;
    };
    if (n_ == 1) return wrap(m[0]);
    return wrap(m[0]) * ng_ + wrap(m[1]);
}

std::array<std::int64_t, 2> Grid::coords(std::int64_t idx) const {
    if (n_ == 1) return {idx, 0};
    return {idx / ng_, idx % ng_};
}

std::array<double, 2> Grid::point(std::int64_t idx) const {
    const auto m = coords(idx);
    const double h = mesh();
    return {static_cast<double>(m[0]) * h, static_cast<double>(m[1]) * h};
}

double Grid::centered(double x) const {
    double v = std::fmod(x, length_);
    if (v < 0) v += length_;
    return v > length_ / 2 ? v - length_ : v;
}

double Grid::axis_distance(double a, double b) const {
    double d = std::fabs(a - b);
    d = std::fmod(d, length_);
    return std::min(d, length_ - d);
}

SampledFunction::SampledFunction(const Grid& g)
    : grid(g), values(static_cast<std::size_t>(g.size()), 0.0) {}

SampledFunction::SampledFunction(const Grid& g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(g.size()))
        throw std::invalid_argument("SampledFunction: value count does not match grid size");
}

namespace {

// FFTW plans are cached per (rank, N, sign) and reused through the new-array
// interface; fftw_malloc'd scratch keeps the alignment the plan was made with.
// Plan creation is the only non-thread-safe part, hence the mutex.
struct PlanCache {
    std::mutex mu;
    std::map<std::tuple<int, std::int64_t, int>, fftw_plan> plans;

    fftw_plan get(int rank, std::int64_t n, int sign) {
        std::lock_guard<std::mutex> lock(mu);
        const auto key = std::make_tuple(rank, n, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        const std::size_t total = static_cast<std::size_t>(rank == 1 ? n : n * n);
        fftw_complex* in = fftw_alloc_complex(total);
        fftw_complex* out = fftw_alloc_complex(total);
        fftw_plan p = rank == 1
            ? fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE)
            : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), in, out, sign,
                               FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        if (!p) throw std::runtime_error("fftw plan creation failed");
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

struct FftwBuffer {
    fftw_complex* data;
    explicit FftwBuffer(std::size_t count)
        : data(fftw_alloc_complex(count)) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

void run_dft(const std::complex<double>* in, std::complex<double>* out, const Grid& g, int sign) {
    const std::size_t total = static_cast<std::size_t>(g.size());
    fftw_plan p = plan_cache().get(g.dim(), g.points_per_axis(), sign);
    FftwBuffer bin(total), bout(total);
    std::memcpy(bin.data, static_cast<const void*>(in), total * sizeof(fftw_complex));
    fftw_execute_dft(p, bin.data, bout.data);
    std::memcpy(static_cast<void*>(out), bout.data, total * sizeof(fftw_complex));
}

} // namespace

std::vector<std::complex<double>> spectrum(const SampledFunction& f) {
    const std::size_t total = f.values.size();
    std::vector<std::complex<double>> in(total), out(total);
    for (std::size_t i = 0; i < total; ++i) in[i] = f.values[i];
    run_dft(in.data(), out.data(), f.grid, FFTW_FORWARD);
    return out;
}

SampledFunction inverse_spectrum(const std::vector<std::complex<double>>& spec, const Grid& g) {
    const std::size_t total = static_cast<std::size_t>(g.size());
    if (spec.size() != total)
        throw std::invalid_argument("inverse_spectrum: spectrum size does not match grid");
    std::vector<std::complex<double>> out(total);
    run_dft(spec.data(), out.data(), g, FFTW_BACKWARD);
    SampledFunction f(g);
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) f.values[i] = out[i].real() * scale;
    return f;
}

std::int64_t signed_frequency(std::int64_t k, std::int64_t n_g) {
    return k <= n_g / 2 ? k : k - n_g;
}

double frequency_radius(const Grid& g, std::int64_t flat_k) {
    const auto m = g.coords(flat_k);
    const double k0 = static_cast<double>(signed_frequency(m[0], g.points_per_axis()));
    if (g.dim() == 1) return std::fabs(k0);
    const double k1 = static_cast<double>(signed_frequency(m[1], g.points_per_axis()));
    return std::sqrt(k0 * k0 + k1 * k1);
}

SampledFunction convolve(const SampledFunction& f, const SampledFunction& g) {
    if (f.grid != g.grid) throw std::invalid_argument("convolve: grids do not match");
    auto fs = spectrum(f);
    const auto gs = spectrum(g);
    for (std::size_t i = 0; i < fs.size(); ++i) fs[i] *= gs[i];
    SampledFunction out = inverse_spectrum(fs, f.grid);
    const double hn = f.grid.cell_measure();
    for (auto& v : out.values) v *= hn;
    return out;
}

SampledFunction apply_symbol(const SampledFunction& f, const std::vector<double>& symbol) {
    if (symbol.size() != f.values.size())
        throw std::invalid_argument("apply_symbol: symbol size does not match grid");
    auto fs = spectrum(f);
    for (std::size_t i = 0; i < fs.size(); ++i) fs[i] *= symbol[i];
    return inverse_spectrum(fs, f.grid);
}

double lp_norm(const SampledFunction& f, double p) {
    if (p == std::numeric_limits<double>::infinity()) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::fabs(v));
        return m;
    }
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    double acc = 0.0;
    for (double v : f.values) acc += std::pow(std::fabs(v), p);
    return std::pow(acc * f.grid.cell_measure(), 1.0 / p);
}

namespace {

constexpr char kMagic[4] = {'H', 'L', 'G', 'F'};

// Serialized numbers are little-endian; this implementation targets
// little-endian hosts and asserts so at runtime.
void require_little_endian() {
    const std::uint16_t probe = 1;
    if (*reinterpret_cast<const std::uint8_t*>(&probe) != 1)
        throw std::runtime_error("hlgf io: big-endian hosts are not supported");
}

} // namespace

void write_hlgf_record(const SampledFunction& f, std::ostream& os) {
    require_little_endian();
    char header[32] = {};
    std::memcpy(header, kMagic, 4);
    const std::uint32_t n = static_cast<std::uint32_t>(f.grid.dim());
    const std::uint64_t ng = static_cast<std::uint64_t>(f.grid.points_per_axis());
    const double len = f.grid.length();
    std::memcpy(header + 4, &n, 4);
    std::memcpy(header + 8, &ng, 8);
    std::memcpy(header + 16, &len, 8);
    os.write(header, 32);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write_hlgf_record: short write");
}

SampledFunction read_hlgf_record(std::istream& is) {
    require_little_endian();
    char header[32];
    is.read(header, 32);
    if (!is || std::memcmp(header, kMagic, 4) != 0)
        throw std::runtime_error("read_hlgf_record: bad magic");
    std::uint32_t n;
    std::uint64_t ng;
    double len;
    std::memcpy(&n, header + 4, 4);
    std::memcpy(&ng, header + 8, 8);
    std::memcpy(&len, header + 16, 8);
    Grid g(static_cast<int>(n), static_cast<std::int64_t>(ng), len);
    std::vector<double> vals(static_cast<std::size_t>(g.size()));
    is.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_hlgf_record: truncated payload");
    return SampledFunction(g, std::move(vals));
}

void write_hlgf(const SampledFunction& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_hlgf: cannot open " + path);
    try {
        write_hlgf_record(f, os);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("write_hlgf: short write to " + path);
    }
}

SampledFunction read_hlgf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_hlgf: cannot open " + path);
    try {
        return read_hlgf_record(is);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string(e.what()) + " in " + path);
    }
}

void write_json_function(const SampledFunction& f, const std::string& path) {
    nlohmann::ordered_json j;
    j["n"] = f.grid.dim();
    j["N_g"] = f.grid.points_per_axis();
    j["L"] = f.grid.length();
    j["values"] = f.values;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_json_function: cannot open " + path);
    os << j.dump(2) << "\n";
}

SampledFunction read_json_function(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_json_function: cannot open " + path);
    nlohmann::json j;
    is >> j;
    Grid g(j.at("n").get<int>(), j.at("N_g").get<std::int64_t>(), j.at("L").get<double>());
    return SampledFunction(g, j.at("values").get<std::vector<double>>());
}

} // namespace hardy
