#include "heunmcv/series.hpp"

#include <algorithm>

#include "heunmcv/errors.hpp"

namespace heunmcv {

PowerSeries PowerSeries::truncated(int n) const {
    PowerSeries r;
    r.c.assign(c.begin(), c.begin() + std::min<size_t>(c.size(), size_t(std::max(n, 0))));
    return r;
}

PowerSeries PowerSeries::plus(const PowerSeries& o) const {
    int n = std::min(len(), o.len());
    PowerSeries r;
    r.c.resize(size_t(n));
    for (int j = 0; j < n; ++j) r.c[size_t(j)] = at(j) + o.at(j);
    return r;
}

PowerSeries PowerSeries::minus(const PowerSeries& o) const {
    int n = std::min(len(), o.len());
    PowerSeries r;
    r.c.resize(size_t(n));
    for (int j = 0; j < n; ++j) r.c[size_t(j)] = at(j) - o.at(j);
    return r;
}

PowerSeries PowerSeries::times(const PowerSeries& o) const {
    int n = std::min(len(), o.len());
    PowerSeries r;
    r.c.assign(size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
        if (c[size_t(i)] == 0.0) continue;
        for (int j = 0; i + j < n && j < o.len(); ++j) r.c[size_t(i + j)] += c[size_t(i)] * o.at(j);
    }
    return r;
}

PowerSeries PowerSeries::times(Complex s) const {
    PowerSeries r = *this;
    for (auto& v : r.c) v *= s;
    return r;
}

PowerSeries PowerSeries::over(const PowerSeries& o) const {
    if (o.len() == 0 || o.c[0] == 0.0)
        fail(Err::InvalidInput, "series division by series with zero constant term");
    int n = std::min(len(), o.len());
    PowerSeries r;
    r.c.assign(size_t(n), 0.0);
    for (int j = 0; j < n; ++j) {
        Complex acc = at(j);
        for (int i = 0; i < j; ++i) acc -= r.c[size_t(i)] * o.at(j - i);
        r.c[size_t(j)] = acc / o.c[0];
    }
    return r;
}

Complex eval(const PowerSeries& p, Complex x) {
    Complex acc = 0.0;
    for (int j = p.len() - 1; j >= 0; --j) acc = acc * x + p.c[size_t(j)];
    return acc;
}

PowerSeries derivative(const PowerSeries& p) {
    PowerSeries r;
    if (p.len() <= 1) return r;
    r.c.resize(size_t(p.len() - 1));
    for (int j = 1; j < p.len(); ++j) r.c[size_t(j - 1)] = double(j) * p.c[size_t(j)];
    return r;
}

void LaurentSeries::normalize() {
    size_t k = 0;
    while (k < p.c.size() && p.c[k] == 0.0) ++k;
    if (k == p.c.size()) {
        offset = 0;
        p.c.assign(1, 0.0);
        return;
    }
    if (k > 0) {
        p.c.erase(p.c.begin(), p.c.begin() + long(k));
        offset += int(k);
    }
}

}  // namespace heunmcv
