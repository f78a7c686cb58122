#include "aros/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "aros/errors.hpp"
#include "aros/rng.hpp"

namespace aros::data {

std::int64_t Dataset::num_classes() const {
    std::int64_t m = -1;
    for (std::int64_t v : y) m = std::max(m, v);
    return m + 1;
}

void Dataset::validate() const {
    if (x.shape().empty() || x.shape()[0] != static_cast<std::int64_t>(y.size()))
        throw ContractError("dataset: x rows and label count disagree");
    if (domain == Domain::kSynthetic2d && (x.rank() != 2 || x.cols() != 2))
        throw ContractError("dataset: synthetic2d data must be n x 2, got " + x.shape_str());
    if (domain == Domain::kImage && x.rank() != 3)
        throw ContractError("dataset: image data must be n x H x W, got " + x.shape_str());
    for (std::int64_t v : y)
        if (v < 0) throw ContractError("dataset: negative label");
}

Dataset gen_two_moons(std::int64_t n, double noise, std::uint64_t seed) {
    if (n <= 0) throw ContractError("two_moons: n must be positive");
    Rng rng(derive_seed(seed, "two_moons"));
    const std::int64_t n0 = (n + 1) / 2;
    Dataset d;
    d.domain = Domain::kSynthetic2d;
    d.x = Tensor::zeros({n, 2});
    d.y.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const bool lower = i >= n0;
        const double t = rng.uniform(0.0, std::numbers::pi);
        double px = std::cos(t);
        double py = std::sin(t);
        if (lower) {
            px = 1.0 - px;
            py = 0.5 - py;
        }
        d.x.at(i, 0) = px + noise * rng.normal();
        d.x.at(i, 1) = py + noise * rng.normal();
        d.y[static_cast<std::size_t>(i)] = lower ? 1 : 0;
    }
    return d;
}

Dataset gen_ring(std::int64_t n, double radius, double noise, std::uint64_t seed) {
    if (n <= 0) throw ContractError("ring: n must be positive");
    if (radius <= 0.0) throw ContractError("ring: radius must be positive");
    Rng rng(derive_seed(seed, "ring"));
    Dataset d;
    d.domain = Domain::kSynthetic2d;
    d.x = Tensor::zeros({n, 2});
    d.y.assign(static_cast<std::size_t>(n), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        d.x.at(i, 0) = radius * std::cos(theta) + noise * rng.normal();
        d.x.at(i, 1) = radius * std::sin(theta) + noise * rng.normal();
    }
    return d;
}

namespace {

Dataset take_rows(const Dataset& d, const std::vector<std::int64_t>& rows) {
    Dataset out;
    out.domain = d.domain;
    std::vector<std::int64_t> shape = d.x.shape();
    shape[0] = static_cast<std::int64_t>(rows.size());
    out.x = Tensor::zeros(shape);
    out.y.resize(rows.size());
    std::int64_t stride = 1;
    for (std::size_t k = 1; k < shape.size(); ++k) stride *= shape[k];
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double* src = d.x.data() + rows[r] * stride;
        std::copy(src, src + stride, out.x.data() + static_cast<std::int64_t>(r) * stride);
        out.y[r] = d.y[static_cast<std::size_t>(rows[r])];
    }
    return out;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& d, double fraction, std::uint64_t seed) {
    d.validate();
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ContractError("split: fraction must lie strictly between 0 and 1");
    const std::int64_t k = d.num_classes();
    std::vector<std::vector<std::int64_t>> by_class(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < d.n(); ++i)
        by_class[static_cast<std::size_t>(d.y[static_cast<std::size_t>(i)])].push_back(i);
    for (std::int64_t c = 0; c < k; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() < 2)
            throw ContractError("split: class " + std::to_string(c) +
                                " has fewer than 2 samples, cannot stratify");

    // Per-class quota by floor, then hand the remaining slots to the classes
    // with the largest fractional remainders so the total matches
    // round(fraction * n). Ties go to the lower class id.
    const std::int64_t total = std::llround(fraction * static_cast<double>(d.n()));
    std::vector<std::int64_t> want(static_cast<std::size_t>(k));
    std::vector<std::pair<double, std::int64_t>> rem;
    std::int64_t assigned = 0;
    for (std::int64_t c = 0; c < k; ++c) {
        const double q = fraction * static_cast<double>(by_class[static_cast<std::size_t>(c)].size());
        want[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(std::floor(q));
        assigned += want[static_cast<std::size_t>(c)];
        rem.emplace_back(q - std::floor(q), c);
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; assigned < total && j < rem.size(); ++j) {
        std::int64_t& w = want[static_cast<std::size_t>(rem[j].second)];
        const auto cap = static_cast<std::int64_t>(
            by_class[static_cast<std::size_t>(rem[j].second)].size());
        if (w < cap) {
            ++w;
            ++assigned;
        }
    }
    if (assigned != total)
        throw ContractError("split: could not reach the requested first-part size");

    Rng rng(derive_seed(seed, "split"));
    std::vector<std::int64_t> first, second;
    for (std::int64_t c = 0; c < k; ++c) {
        auto idx = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(idx);
        idx.resize(static_cast<std::size_t>(want[static_cast<std::size_t>(c)]));
        std::sort(idx.begin(), idx.end());
        first.insert(first.end(), idx.begin(), idx.end());
    }
    std::sort(first.begin(), first.end());
    std::vector<char> taken(static_cast<std::size_t>(d.n()), 0);
    for (std::int64_t i : first) taken[static_cast<std::size_t>(i)] = 1;
    for (std::int64_t i = 0; i < d.n(); ++i)
        if (!taken[static_cast<std::size_t>(i)]) second.push_back(i);
    return {take_rows(d, first), take_rows(d, second)};
}

std::string dataset_to_csv(const Dataset& d) {
    d.validate();
    if (d.domain != Domain::kSynthetic2d)
        throw ContractError("csv export only covers synthetic2d data");
    std::ostringstream out;
    out << "x0,x1,label\n";
    char buf[64];
    for (std::int64_t i = 0; i < d.n(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%lld\n", d.x.at(i, 0), d.x.at(i, 1),
                      static_cast<long long>(d.y[static_cast<std::size_t>(i)]));
        out << buf;
    }
    return out.str();
}

namespace {

double parse_double_field(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw FormatError("csv: bad numeric field on line " + std::to_string(line_no));
    return v;
}

}  // namespace

Dataset dataset_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x0,x1,label")
        throw FormatError("csv: expected header \"x0,x1,label\", got \"" + line + "\"");
    std::vector<double> xs;
    std::vector<std::int64_t> ys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw FormatError("csv: expected 3 fields on line " + std::to_string(line_no));
        xs.push_back(parse_double_field(std::string_view(line).substr(0, c1), line_no));
        xs.push_back(parse_double_field(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line_no));
        std::int64_t label = 0;
        const char* lb = line.data() + c2 + 1;
        const char* le = line.data() + line.size();
        auto [p, ec] = std::from_chars(lb, le, label);
        if (ec != std::errc{} || p != le || label < 0)
            throw FormatError("csv: bad label on line " + std::to_string(line_no));
        ys.push_back(label);
    }
    Dataset d;
    d.domain = Domain::kSynthetic2d;
    const auto n = static_cast<std::int64_t>(ys.size());
    d.x = Tensor::zeros({n, 2});
    std::copy(xs.begin(), xs.end(), d.x.data());
    d.y = std::move(ys);
    d.validate();
    return d;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace aros::data
