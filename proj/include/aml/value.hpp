// Finite variable domains, valuations and deterministic enumeration.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace aml {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text; carries a 1-based source position.
struct ParseError : Error {
    int line = 0;
    int column = 0;
    ParseError(std::string msg, int l, int c)
        : Error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), column(c) {}
};

/// A structurally well-formed definition that violates a semantic rule.
struct ValidationError : Error {
    using Error::Error;
};

/// Work or memory would exceed a configured cap. Never silently sampled around.
struct CapacityError : Error {
    using Error::Error;
};

enum class DomainKind { Boolean, BoundedInt, Enumeration };

/// A finite, enumerable value domain. Values are stored as int64:
/// booleans as 0/1, bounded integers as themselves, enumeration
/// members as their label index.
struct Domain {
    DomainKind kind = DomainKind::Boolean;
    std::int64_t lo = 0; // BoundedInt only
    std::int64_t hi = 0;
    std::vector<std::string> labels; // Enumeration only

    static Domain boolean() { return Domain{DomainKind::Boolean, 0, 1, {}}; }

    static Domain bounded_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi)
            throw ValidationError("int domain has lo > hi: [" + std::to_string(lo) + ".." +
                                  std::to_string(hi) + "]");
        return Domain{DomainKind::BoundedInt, lo, hi, {}};
    }

    static Domain enumeration(std::vector<std::string> labels) {
        if (labels.empty()) throw ValidationError("enum domain needs at least one label");
        for (std::size_t i = 0; i < labels.size(); ++i)
            for (std::size_t j = i + 1; j < labels.size(); ++j)
                if (labels[i] == labels[j])
                    throw ValidationError("duplicate enum label '" + labels[i] + "'");
        Domain d;
        d.kind = DomainKind::Enumeration;
        d.labels = std::move(labels);
        return d;
    }

    std::uint64_t cardinality() const {
        switch (kind) {
            case DomainKind::Boolean: return 2;
            case DomainKind::BoundedInt: return static_cast<std::uint64_t>(hi - lo + 1);
            case DomainKind::Enumeration: return labels.size();
        }
        return 0;
    }

    /// ordinal 0..cardinality-1 -> stored value
    std::int64_t value_at(std::uint64_t ordinal) const {
        return kind == DomainKind::BoundedInt ? lo + static_cast<std::int64_t>(ordinal)
                                              : static_cast<std::int64_t>(ordinal);
    }

    bool contains(std::int64_t v) const {
        switch (kind) {
            case DomainKind::Boolean: return v == 0 || v == 1;
            case DomainKind::BoundedInt: return v >= lo && v <= hi;
            case DomainKind::Enumeration:
                return v >= 0 && v < static_cast<std::int64_t>(labels.size());
        }
        return false;
    }

    std::string value_to_string(std::int64_t v) const {
        switch (kind) {
            case DomainKind::Boolean: return v ? "true" : "false";
            case DomainKind::BoundedInt: return std::to_string(v);
            case DomainKind::Enumeration: return labels.at(static_cast<std::size_t>(v));
        }
        return "?";
    }

    /// Inverse of value_to_string; -1 when the text names no member.
    std::int64_t value_from_string(const std::string& s) const {
        switch (kind) {
            case DomainKind::Boolean:
                if (s == "true") return 1;
                if (s == "false") return 0;
                return -1;
            case DomainKind::BoundedInt:
                try {
                    std::size_t pos = 0;
                    std::int64_t v = std::stoll(s, &pos);
                    if (pos != s.size() || !contains(v)) return lo - 1;
                    return v;
                } catch (...) {
                    return lo - 1;
                }
            case DomainKind::Enumeration:
                for (std::size_t i = 0; i < labels.size(); ++i)
                    if (labels[i] == s) return static_cast<std::int64_t>(i);
                return -1;
        }
        return -1;
    }

    std::int64_t label_index(const std::string& label) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return static_cast<std::int64_t>(i);
        return -1;
    }

    std::string to_string() const {
        switch (kind) {
            case DomainKind::Boolean: return "bool";
            case DomainKind::BoundedInt:
                return "int[" + std::to_string(lo) + ".." + std::to_string(hi) + "]";
            case DomainKind::Enumeration: {
                std::string s = "enum { ";
                for (std::size_t i = 0; i < labels.size(); ++i) {
                    if (i) s += ", ";
                    s += labels[i];
                }
                return s + " }";
            }
        }
        return "?";
    }

    friend bool operator==(const Domain& a, const Domain& b) {
        return a.kind == b.kind && a.lo == b.lo && a.hi == b.hi && a.labels == b.labels;
    }
    friend bool operator!=(const Domain& a, const Domain& b) { return !(a == b); }
};

enum class VarRole { State, Input };

struct VariableDecl {
    std::string name;
    Domain domain;
    VarRole role = VarRole::State;
    bool observed = false;
};

/// An ordered variable list shared by every valuation over it. Layouts are
/// immutable once built; valuations hold a shared pointer to theirs.
struct VariableLayout {
    std::vector<VariableDecl> vars;

    explicit VariableLayout(std::vector<VariableDecl> v) : vars(std::move(v)) {}

    std::size_t size() const { return vars.size(); }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return static_cast<int>(i);
        return -1;
    }

    /// Product cardinality, capped. Throws CapacityError above the cap.
    std::uint64_t space_size(std::uint64_t cap) const {
        unsigned __int128 total = 1;
        for (const auto& v : vars) {
            total *= v.domain.cardinality();
            if (total > cap)
                throw CapacityError("valuation space exceeds cap of " + std::to_string(cap));
        }
        return static_cast<std::uint64_t>(total);
    }
};

using LayoutPtr = std::shared_ptr<const VariableLayout>;

inline LayoutPtr make_layout(std::vector<VariableDecl> vars) {
    return std::make_shared<const VariableLayout>(std::move(vars));
}

/// A total assignment of values to one layout's variables.
struct Valuation {
    LayoutPtr layout;
    std::vector<std::int64_t> values;

    Valuation() = default;
    Valuation(LayoutPtr l, std::vector<std::int64_t> v) : layout(std::move(l)), values(std::move(v)) {}

    std::int64_t operator[](std::size_t i) const { return values[i]; }

    std::int64_t get(const std::string& name) const {
        int i = layout->index_of(name);
        if (i < 0) throw Error("valuation has no variable '" + name + "'");
        return values[static_cast<std::size_t>(i)];
    }

    bool in_domains() const {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!layout->vars[i].domain.contains(values[i])) return false;
        return true;
    }

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) s += ", ";
            s += layout->vars[i].name + ": " + layout->vars[i].domain.value_to_string(values[i]);
        }
        return s + "}";
    }

    friend bool operator==(const Valuation& a, const Valuation& b) { return a.values == b.values; }
    friend bool operator!=(const Valuation& a, const Valuation& b) { return !(a == b); }
    friend bool operator<(const Valuation& a, const Valuation& b) { return a.values < b.values; }
};

struct ValuationHash {
    std::size_t operator()(const Valuation& v) const {
        std::uint64_t h = 1469598103934665603ULL;
        for (std::int64_t x : v.values) {
            h ^= static_cast<std::uint64_t>(x);
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

struct ValuationEq {
    bool operator()(const Valuation& a, const Valuation& b) const { return a.values == b.values; }
};

/// Odometer over a layout's valuation space in lexicographic order:
/// first declared variable most significant, each domain ascending.
class ValuationEnumerator {
public:
    ValuationEnumerator(LayoutPtr layout, std::uint64_t cap) : layout_(std::move(layout)) {
        total_ = layout_->space_size(cap);
        current_.assign(layout_->size(), 0);
    }

    std::uint64_t total() const { return total_; }
    bool done() const { return index_ >= total_; }

    Valuation current() const {
        std::vector<std::int64_t> vals(layout_->size());
        for (std::size_t i = 0; i < layout_->size(); ++i)
            vals[i] = layout_->vars[i].domain.value_at(current_[i]);
        return Valuation(layout_, std::move(vals));
    }

    void advance() {
        ++index_;
        if (done()) return;
        for (std::size_t i = layout_->size(); i-- > 0;) {
            if (++current_[i] < layout_->vars[i].domain.cardinality()) return;
            current_[i] = 0;
        }
    }

private:
    LayoutPtr layout_;
    std::uint64_t total_ = 0;
    std::uint64_t index_ = 0;
    std::vector<std::uint64_t> current_;
};

/// SplitMix64: the toolkit's seed-derivation and sampling generator.
/// Chosen for portability; every stream is fully determined by its seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform value in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw Error("below(0)");
        std::uint64_t limit = ~0ULL - (~0ULL % n);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
        return g.next();
    }

private:
    std::uint64_t state_;
};

} // namespace aml
