#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ifsrecur/bodies.hpp"

namespace ifsrecur {

inline constexpr std::uint64_t kDefaultCellBudget = std::uint64_t{1} << 26;
inline constexpr std::uint32_t kMaxResolution = std::uint32_t{1} << 20;

/// Axis-aligned box [lo, hi].
struct Window {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
  bool contains(const Window& other) const;
};

/// Bounding box of the bodies, enlarged by `pad` times its extent per axis.
Window bounding_window(const std::vector<PlacedBody>& bodies, double pad = 0.0);

/// Occupancy grid over a window in dimension 1 or 2, row-major (y rows).
class PixelMask {
 public:
  PixelMask(Window window, std::vector<std::uint32_t> resolution,
            std::uint64_t cell_budget = kDefaultCellBudget);

  int dim() const { return window_.dim(); }
  const Window& window() const { return window_; }
  const std::vector<std::uint32_t>& resolution() const { return resolution_; }
  std::uint32_t nx() const { return resolution_[0]; }
  std::uint32_t ny() const { return dim() == 2 ? resolution_[1] : 1; }
  std::uint64_t cell_count() const { return bits_.size(); }
  double cell_size(int axis) const { return (window_.hi(axis) - window_.lo(axis)) / resolution_[static_cast<std::size_t>(axis)]; }
  double cell_volume() const;

  bool at(std::uint64_t index) const { return bits_[index] != 0; }
  void set(std::uint64_t index, bool value) { bits_[index] = value ? 1 : 0; }
  std::uint8_t* data() { return bits_.data(); }
  const std::uint8_t* data() const { return bits_.data(); }

  /// Center of cell (ix, iy).
  Vec cell_center(std::uint32_t ix, std::uint32_t iy = 0) const;

  std::uint64_t occupied_count() const;
  double measure() const { return static_cast<double>(occupied_count()) * cell_volume(); }

  /// Cells touched by some body but not inside any single body; set by rasterize.
  std::uint64_t boundary_cells() const { return boundary_cells_; }
  double boundary_error() const { return static_cast<double>(boundary_cells_) * cell_volume(); }
  void set_boundary_cells(std::uint64_t n) { boundary_cells_ = n; }

  bool same_grid(const PixelMask& other) const;
  PixelMask& operator|=(const PixelMask& other);
  PixelMask& operator&=(const PixelMask& other);

 private:
  Window window_;
  std::vector<std::uint32_t> resolution_;
  std::vector<std::uint8_t> bits_;
  std::uint64_t boundary_cells_ = 0;
};

PixelMask operator|(PixelMask a, const PixelMask& b);
PixelMask operator&(PixelMask a, const PixelMask& b);

/// Count of cells set in both masks.
std::uint64_t intersection_count(const PixelMask& a, const PixelMask& b);

/// Center-sampling rasterization: a cell is occupied iff its center lies in
/// some body. The boundary count uses cell corners.
PixelMask rasterize(const std::vector<PlacedBody>& bodies, const Window& window,
                    const std::vector<std::uint32_t>& resolution,
                    std::uint64_t cell_budget = kDefaultCellBudget);

/// Binary PGM (P5), 255 = occupied, top image row = largest y. d = 2 only.
void write_pgm(const PixelMask& mask, const std::filesystem::path& path);
/// Runs of occupied cells as CSV rows "start_cell,length,start_x,end_x". d = 1 only.
void write_run_length_csv(const PixelMask& mask, const std::filesystem::path& path);

}  // namespace ifsrecur
