//! Deterministic raster primitives. Everything here is a pure function of
//! its inputs; border handling for window operations is replicate.

pub mod components;
pub mod edges;
pub mod filters;
pub mod io;
pub mod raster;
pub mod resize;

pub use components::{clear_border_components, complement, connected_components, fill_holes, filter_by_area};
pub use edges::{sobel_edges, sobel_edges_binary, sobel_gradients, sobel_magnitude};
pub use filters::{box_filter, difference, median_filter, threshold, to_grayscale, window_anchor, Rgb8};
pub use raster::{BBox, BinaryImage, GrayImage, LabelMap, Region};
pub use resize::resize_nearest;
