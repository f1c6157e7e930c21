// SPDX-License-Identifier: Apache-2.0
#include "coalg/finset.hpp"

#include <algorithm>

namespace coalg {

FinSet::FinSet(std::vector<std::string> elements) : elems_(std::move(elements)) {
    std::sort(elems_.begin(), elems_.end());
    auto dup = std::adjacent_find(elems_.begin(), elems_.end());
    if (dup != elems_.end()) throw Error("duplicate element \"" + *dup + "\" in finite set");
}

FinSet FinSet::numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
    return FinSet(std::move(v));
}

std::optional<std::size_t> FinSet::find(const std::string& e) const {
    auto it = std::lower_bound(elems_.begin(), elems_.end(), e);
    if (it == elems_.end() || *it != e) return std::nullopt;
    return static_cast<std::size_t>(it - elems_.begin());
}

std::size_t FinSet::index_of(const std::string& e) const {
    auto i = find(e);
    if (!i) throw Error("\"" + e + "\" is not an element of the set");
    return *i;
}

FinFun::FinFun(FinSet dom, FinSet cod, std::vector<std::size_t> image)
    : dom_(std::move(dom)), cod_(std::move(cod)), image_(std::move(image)) {
    if (image_.size() != dom_.size()) throw Error("function is not total on its domain");
    for (auto i : image_)
        if (i >= cod_.size()) throw Error("function image outside its codomain");
}

FinFun FinFun::from_names(FinSet dom, FinSet cod, const std::vector<std::string>& image_names) {
    std::vector<std::size_t> image;
    image.reserve(image_names.size());
    for (const auto& n : image_names) image.push_back(cod.index_of(n));
    return FinFun(std::move(dom), std::move(cod), std::move(image));
}

FinFun FinFun::identity(const FinSet& x) {
    std::vector<std::size_t> image(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) image[i] = i;
    return FinFun(x, x, std::move(image));
}

const std::string& FinFun::operator()(const std::string& x) const { return cod_[image_[dom_.index_of(x)]]; }

bool FinFun::injective() const {
    std::vector<bool> hit(cod_.size(), false);
    for (auto i : image_) {
        if (hit[i]) return false;
        hit[i] = true;
    }
    return true;
}

bool FinFun::surjective() const {
    std::vector<bool> hit(cod_.size(), false);
    for (auto i : image_) hit[i] = true;
    return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

FinFun FinFun::then(const FinFun& g) const {
    if (!(cod_ == g.dom_)) throw Error("functions are not composable");
    std::vector<std::size_t> image(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) image[i] = g.image_[image_[i]];
    return FinFun(dom_, g.cod_, std::move(image));
}

std::uint64_t count_functions(std::size_t dom, std::size_t cod) { return sat::pow(cod, dom); }

void for_each_function(const FinSet& dom, const FinSet& cod, const std::function<void(const FinFun&)>& visit,
                       const Limits& limits) {
    limits.require(count_functions(dom.size(), cod.size()), "function space");
    if (cod.empty() && !dom.empty()) return;
    std::vector<std::size_t> image(dom.size(), 0);
    while (true) {
        limits.poll();
        visit(FinFun(dom, cod, image));
        std::size_t i = 0;
        while (i < image.size() && ++image[i] == cod.size()) image[i++] = 0;
        if (i == image.size()) return;
    }
}

}  // namespace coalg
