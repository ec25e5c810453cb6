#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace hardy {

// Uniform periodic grid on the torus [0,L)^n, n = 1 or 2, N_g a power of two
// (>= 8), mesh h = L/N_g. Sample m = (m_1,...,m_n) sits at x = m*h; storage is
// row-major with axis 0 slowest.
class Grid {
public:
    Grid(int n, std::int64_t n_g, double length);

    int dim() const { return n_; }
    std::int64_t points_per_axis() const { return ng_; }
    double length() const { return length_; }
    double mesh() const { return length_ / static_cast<double>(ng_); }
    double cell_measure() const; // h^n
    std::int64_t size() const;   // N_g^n
    int log2_points() const { return log2_ng_; }

    bool operator==(const Grid& o) const {
        return n_ == o.n_ && ng_ == o.ng_ && length_ == o.length_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    std::int64_t index(std::array<std::int64_t, 2> m) const; // wraps mod N_g
    std::array<std::int64_t, 2> coords(std::int64_t idx) const;
    std::array<double, 2> point(std::int64_t idx) const;

    // representative of x in (-L/2, L/2]
    double centered(double x) const;
    // torus distance along one axis
    double axis_distance(double a, double b) const;

private:
    int n_;
    std::int64_t ng_;
    double length_;
    int log2_ng_;
};

struct SampledFunction {
    Grid grid;
    std::vector<double> values;

    explicit SampledFunction(const Grid& g);
    SampledFunction(const Grid& g, std::vector<double> v);

    double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
};

// Spectra use the unnormalized forward DFT; the inverse carries the 1/N_g^n.
// Index k per axis is stored in natural FFT order, signed value k<=N/2 ? k : k-N.
std::vector<std::complex<double>> spectrum(const SampledFunction& f);
SampledFunction inverse_spectrum(const std::vector<std::complex<double>>& spec, const Grid& g);

// signed frequency of lattice index along one axis
std::int64_t signed_frequency(std::int64_t k, std::int64_t n_g);
// Euclidean length |k| of the signed frequency vector for flat index k
double frequency_radius(const Grid& g, std::int64_t flat_k);

// circular convolution scaled by the cell measure:
// (f*g)[x] = h^n sum_y f[y] g[x-y]; computed through the DFT in O(N log N)
SampledFunction convolve(const SampledFunction& f, const SampledFunction& g);

// pointwise multiply the spectrum of f by a real symbol over the k-lattice
SampledFunction apply_symbol(const SampledFunction& f, const std::vector<double>& symbol);

// (h^n sum |f|^p)^(1/p) for 0 < p < inf; max|f| for p = inf
double lp_norm(const SampledFunction& f, double p);

// binary format: 32-byte header (magic "HLGF", u32 n, u64 N_g, f64 L, 8 bytes
// reserved) followed by N_g^n little-endian doubles
void write_hlgf(const SampledFunction& f, const std::string& path);
SampledFunction read_hlgf(const std::string& path);

// stream forms, for files that hold several records back to back
void write_hlgf_record(const SampledFunction& f, std::ostream& os);
SampledFunction read_hlgf_record(std::istream& is);

// JSON fixture form: {"n":..,"N_g":..,"L":..,"values":[..]}
void write_json_function(const SampledFunction& f, const std::string& path);
SampledFunction read_json_function(const std::string& path);

} // namespace hardy
