#ifndef PDC_INDEX_SET_HPP
#define PDC_INDEX_SET_HPP

#include <string>
#include <vector>

namespace pdc {

/// Sorted, duplicate-free list of 0-based point indices.
using IndexSet = std::vector<int>;

/// Sorts and deduplicates.
IndexSet normalized(IndexSet s);

IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
bool is_subset(const IndexSet& a, const IndexSet& b);
bool contains(const IndexSet& s, int x);

/// {0, ..., n-1} minus s.
IndexSet complement(int n, const IndexSet& s);
IndexSet iota_set(int first, int count);

/// Formats as "{1,2,3}" with 1-based indices, for messages.
std::string format_one_based(const IndexSet& s);

}  // namespace pdc

#endif  // PDC_INDEX_SET_HPP
