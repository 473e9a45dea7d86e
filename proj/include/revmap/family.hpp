#pragma once

// Finitely supported perturbation data ã(ξ,η) = Σ a_{ij} ξ^i η^j, i+j > 2s, with text I/O.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "series.hpp"

namespace revmap {

struct FamilyTerm {
    int i;
    int j;
    cplx value;
};

class CoefficientFamily {
public:
    // Largest exponent accepted in either variable.
    static constexpr int max_exponent = 127;

    CoefficientFamily() : CoefficientFamily(1) {}

    explicit CoefficientFamily(int s, bool hermitian = false) : s_(s), hermitian_(hermitian) {
        if (s < 1) {
            throw invalid_input("CoefficientFamily: s must be at least 1");
        }
    }

    int s() const noexcept { return s_; }
    bool hermitian() const noexcept { return hermitian_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    // Insert (or overwrite) a_{ij}. With the Hermitian flag, a_{ji} = conj(a_{ij}) is set too.
    void set(int i, int j, cplx value) {
        validate(i, j, value);
        if (hermitian_) {
            if (i == j && value.imag() != 0.0) {
                throw invalid_input("CoefficientFamily: Hermitian diagonal entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") must be real");
            }
            entries_[{j, i}] = std::conj(value);
        }
        entries_[{i, j}] = value;
        rebuild_cache();
    }

    cplx operator()(int i, int j) const {
        auto it = entries_.find({i, j});
        return it == entries_.end() ? cplx{} : it->second;
    }

    const std::map<std::pair<int, int>, cplx> &entries() const noexcept { return entries_; }

    int max_degree() const noexcept { return max_degree_; }

    // max |a_{ij}|
    double max_modulus() const {
        double m = 0.0;
        for (const auto &[k, v] : entries_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    // t·a (stays in Σ only while |t|·max|a| ≤ 1).
    CoefficientFamily scaled(cplx t) const {
        CoefficientFamily r(s_, false);
        for (const auto &[k, v] : entries_) {
            r.set(k.first, k.second, t * v);
        }
        r.hermitian_ = hermitian_ && t.imag() == 0.0;
        return r;
    }

    // ā: every coefficient conjugated, indices kept.
    CoefficientFamily conjugated() const {
        CoefficientFamily r(s_, false);
        for (const auto &[k, v] : entries_) {
            r.set(k.first, k.second, std::conj(v));
        }
        r.hermitian_ = false;
        return r;
    }

    // Exact check of a_{ji} = conj(a_{ij}) over all stored entries.
    bool is_hermitian_symmetric() const {
        for (const auto &[k, v] : entries_) {
            if ((*this)(k.second, k.first) != std::conj(v)) {
                return false;
            }
        }
        return true;
    }

    cplx evaluate(cplx x, cplx y) const {
        Powers xp, yp;
        fill_powers(x, xp);
        fill_powers(y, yp);
        cplx sum{};
        for (const auto &t : terms_) {
            sum += t.value * xp[static_cast<std::size_t>(t.i)] * yp[static_cast<std::size_t>(t.j)];
        }
        return sum;
    }

    // (ã, ∂ã/∂ξ, ∂ã/∂η)
    std::array<cplx, 3> evaluate_with_gradient(cplx x, cplx y) const {
        Powers xp, yp;
        fill_powers(x, xp);
        fill_powers(y, yp);
        cplx f{}, fx{}, fy{};
        for (const auto &t : terms_) {
            const auto i = static_cast<std::size_t>(t.i);
            const auto j = static_cast<std::size_t>(t.j);
            f += t.value * xp[i] * yp[j];
            if (t.i > 0) {
                fx += t.value * static_cast<double>(t.i) * xp[i - 1] * yp[j];
            }
            if (t.j > 0) {
                fy += t.value * static_cast<double>(t.j) * xp[i] * yp[j - 1];
            }
        }
        return {f, fx, fy};
    }

    // ã as a jet truncated at `order`.
    Jet to_jet(int order) const {
        Jet r(order);
        for (const auto &t : terms_) {
            if (t.i + t.j <= order) {
                r.at(t.i, t.j) = t.value;
            }
        }
        return r;
    }

    friend bool operator==(const CoefficientFamily &a, const CoefficientFamily &b) {
        return a.s_ == b.s_ && a.hermitian_ == b.hermitian_ && a.entries_ == b.entries_;
    }

private:
    void validate(int i, int j, cplx value) const {
        const std::string where = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        if (i < 0 || j < 0) {
            throw invalid_input("CoefficientFamily: negative index " + where);
        }
        if (i > max_exponent || j > max_exponent) {
            throw invalid_input("CoefficientFamily: exponent in " + where + " exceeds " +
                                std::to_string(max_exponent));
        }
        if (i + j <= 2 * s_) {
            throw invalid_input("CoefficientFamily: index " + where + " has i+j <= 2s = " + std::to_string(2 * s_));
        }
        if (!(std::abs(value) <= 1.0)) {
            throw invalid_input("CoefficientFamily: |a" + where + "| exceeds 1");
        }
    }

    using Powers = std::array<cplx, max_exponent + 1>;

    void rebuild_cache() {
        terms_.clear();
        max_degree_ = 0;
        for (const auto &[k, v] : entries_) {
            if (v != cplx{}) {
                terms_.push_back({k.first, k.second, v});
            }
            max_degree_ = std::max({max_degree_, k.first, k.second});
        }
    }

    void fill_powers(cplx x, Powers &p) const {
        p[0] = 1.0;
        for (int k = 1; k <= max_degree_; ++k) {
            p[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k - 1)] * x;
        }
    }

    int s_;
    bool hermitian_;
    std::map<std::pair<int, int>, cplx> entries_;
    std::vector<FamilyTerm> terms_;
    int max_degree_ = 0;
};

// Parse "i j re im" lines ('#' starts a comment). Σ membership is validated per entry.
inline CoefficientFamily parse_family(std::istream &in, int s, bool hermitian) {
    CoefficientFamily fam(s, hermitian);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        int i = 0, j = 0;
        double re = 0.0, im = 0.0;
        if (!(ls >> i)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            throw invalid_input("family line " + std::to_string(lineno) + ": expected 'i j re im'");
        }
        std::string extra;
        if (!(ls >> j >> re >> im) || (ls >> extra)) {
            throw invalid_input("family line " + std::to_string(lineno) + ": expected 'i j re im'");
        }
        const cplx v{re, im};
        if (hermitian && fam.entries().count({i, j}) && fam(i, j) != v) {
            throw invalid_input("family line " + std::to_string(lineno) + ": entry (" + std::to_string(i) + "," +
                                std::to_string(j) + ") contradicts Hermitian closure of an earlier line");
        }
        try {
            fam.set(i, j, v);
        } catch (const invalid_input &e) {
            throw invalid_input("family line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return fam;
}

inline CoefficientFamily parse_family_file(const std::string &path, int s, bool hermitian) {
    std::ifstream in(path);
    if (!in) {
        throw error("cannot open family file '" + path + "'");
    }
    return parse_family(in, s, hermitian);
}

// Writes every stored entry with 17 significant digits, so parsing the output restores the family exactly.
inline void write_family(std::ostream &out, const CoefficientFamily &fam) {
    char buf[128];
    for (const auto &[k, v] : fam.entries()) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", k.first, k.second, v.real(), v.imag());
        out << buf;
    }
}

} // namespace revmap
