#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtm/baselines.hpp"
#include "dtm/dtm.hpp"
#include "dtm/eval.hpp"
#include "dtm/matching.hpp"

namespace py = pybind11;

namespace {

dtm::GrayImage image_from_array(const py::array_t<std::uint8_t, py::array::c_style>& arr) {
    if (arr.ndim() != 2)
        throw std::invalid_argument("expected a 2-D uint8 array (height x width)");
    const int h = static_cast<int>(arr.shape(0));
    const int w = static_cast<int>(arr.shape(1));
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h);
    std::copy(arr.data(), arr.data() + pixels.size(), pixels.begin());
    return dtm::GrayImage(w, h, std::move(pixels));
}

py::array_t<std::uint8_t> image_to_array(const dtm::GrayImage& img) {
    py::array_t<std::uint8_t> arr({img.height, img.width});
    std::copy(img.pixels.begin(), img.pixels.end(), arr.mutable_data());
    return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Deformable template matching toolkit";

    py::class_<dtm::GrayImage>(m, "GrayImage")
        .def(py::init(&image_from_array), py::arg("array"))
        .def_readonly("width", &dtm::GrayImage::width)
        .def_readonly("height", &dtm::GrayImage::height)
        .def("to_array", &image_to_array)
        .def("__eq__", [](const dtm::GrayImage& a, const dtm::GrayImage& b) { return a == b; });

    py::class_<dtm::BBox>(m, "BBox")
        .def(py::init([](int xmin, int ymin, int xmax, int ymax) {
                 return dtm::BBox{xmin, ymin, xmax, ymax};
             }),
             py::arg("xmin"), py::arg("ymin"), py::arg("xmax"), py::arg("ymax"))
        .def_readwrite("xmin", &dtm::BBox::xmin)
        .def_readwrite("ymin", &dtm::BBox::ymin)
        .def_readwrite("xmax", &dtm::BBox::xmax)
        .def_readwrite("ymax", &dtm::BBox::ymax);

    m.def("load_pgm", &dtm::load_pgm, py::arg("path"));
    m.def("save_pgm", &dtm::save_pgm, py::arg("image"), py::arg("path"));
    m.def("crop", &dtm::crop, py::arg("image"), py::arg("bbox"));
    m.def("resize_bilinear", &dtm::resize_bilinear, py::arg("image"), py::arg("width"),
          py::arg("height"));

    py::class_<dtm::FeatureGrid>(m, "FeatureGrid")
        .def_readonly("cells_x", &dtm::FeatureGrid::cells_x)
        .def_readonly("cells_y", &dtm::FeatureGrid::cells_y)
        .def_readonly("bins", &dtm::FeatureGrid::bins)
        .def_readonly("cell_size", &dtm::FeatureGrid::cell_size)
        .def_readonly("values", &dtm::FeatureGrid::values);

    m.def("hog", &dtm::hog, py::arg("image"), py::arg("cell_size") = 8, py::arg("bins") = 9);

    py::class_<dtm::DtmConfig>(m, "DtmConfig")
        .def(py::init<>())
        .def_readwrite("n", &dtm::DtmConfig::n)
        .def_readwrite("m", &dtm::DtmConfig::m)
        .def_readwrite("canonical_w", &dtm::DtmConfig::canonical_w)
        .def_readwrite("canonical_h", &dtm::DtmConfig::canonical_h)
        .def_readwrite("cell_size", &dtm::DtmConfig::cell_size)
        .def_readwrite("bins", &dtm::DtmConfig::bins);

    py::class_<dtm::Anchor>(m, "Anchor")
        .def_readonly("x", &dtm::Anchor::x)
        .def_readonly("y", &dtm::Anchor::y);

    py::class_<dtm::Placement>(m, "Placement")
        .def_readonly("n", &dtm::Placement::n)
        .def_readonly("m", &dtm::Placement::m)
        .def_readonly("anchors", &dtm::Placement::anchors);

    py::class_<dtm::MatchResult>(m, "MatchResult")
        .def_readonly("similarity_forward", &dtm::MatchResult::similarity_forward)
        .def_readonly("similarity_backward", &dtm::MatchResult::similarity_backward)
        .def_readonly("similarity_total", &dtm::MatchResult::similarity_total)
        .def_readonly("placement_forward", &dtm::MatchResult::placement_forward)
        .def_readonly("placement_backward", &dtm::MatchResult::placement_backward)
        .def_readonly("sweeps_forward", &dtm::MatchResult::sweeps_forward)
        .def_readonly("sweeps_backward", &dtm::MatchResult::sweeps_backward);

    m.def("total_score", &dtm::total_score, py::arg("a"), py::arg("b"),
          py::arg("config") = dtm::DtmConfig{});

    py::class_<dtm::BaselineScore>(m, "BaselineScore")
        .def_readonly("method", &dtm::BaselineScore::method)
        .def_readonly("score", &dtm::BaselineScore::score);

    py::class_<dtm::BaselineConfig>(m, "BaselineConfig")
        .def(py::init<>())
        .def_readwrite("canonical_w", &dtm::BaselineConfig::canonical_w)
        .def_readwrite("canonical_h", &dtm::BaselineConfig::canonical_h)
        .def_readwrite("cell_size", &dtm::BaselineConfig::cell_size)
        .def_readwrite("bins", &dtm::BaselineConfig::bins);

    m.def("sad", &dtm::sad, py::arg("a"), py::arg("b"));
    m.def("sad1", &dtm::sad1, py::arg("a"), py::arg("b"));
    m.def("sad2", &dtm::sad2, py::arg("a"), py::arg("b"));
    m.def("hog1", &dtm::hog1, py::arg("a"), py::arg("b"),
          py::arg("config") = dtm::BaselineConfig{});
    m.def("hog2", &dtm::hog2, py::arg("a"), py::arg("b"),
          py::arg("config") = dtm::BaselineConfig{});

    py::class_<dtm::SiftKeypoint>(m, "SiftKeypoint")
        .def_readonly("x", &dtm::SiftKeypoint::x)
        .def_readonly("y", &dtm::SiftKeypoint::y)
        .def_readonly("scale", &dtm::SiftKeypoint::scale)
        .def_readonly("orientation", &dtm::SiftKeypoint::orientation);

    py::class_<dtm::SiftDescriptor>(m, "SiftDescriptor")
        .def_property_readonly(
            "values", [](const dtm::SiftDescriptor& d) {
                return std::vector<double>(d.values.begin(), d.values.end());
            })
        .def_readonly("degenerate", &dtm::SiftDescriptor::degenerate);

    m.def(
        "detect_sift",
        [](const dtm::GrayImage& img) { return dtm::detect_sift(img); },
        py::arg("image"));
    m.def("sift_descriptor", &dtm::sift_descriptor, py::arg("image"), py::arg("keypoint"),
          py::arg("gaussian_weighting"));
    m.def("conventional_sift_similarity", &dtm::conventional_sift_similarity, py::arg("a"),
          py::arg("b"));
    m.def("deformable_sift_similarity", &dtm::deformable_sift_similarity, py::arg("a"),
          py::arg("b"));

    py::class_<dtm::Homography>(m, "Homography")
        .def_property_readonly("matrix", [](const dtm::Homography& h) {
            py::array_t<double> arr({3, 3});
            std::copy(h.m.begin(), h.m.end(), arr.mutable_data());
            return arr;
        });

    m.def(
        "estimate_homography_dlt",
        [](const std::vector<std::array<double, 4>>& pts) {
            std::vector<dtm::PointPair> pairs;
            pairs.reserve(pts.size());
            for (const auto& p : pts)
                pairs.push_back({p[0], p[1], p[2], p[3]});
            return dtm::estimate_homography_dlt(pairs);
        },
        py::arg("pairs"), "Pairs are (x_a, y_a, x_b, y_b) tuples");

    m.def(
        "roc_auc",
        [](const std::vector<double>& pos, const std::vector<double>& neg) {
            return dtm::roc_auc(pos, neg);
        },
        py::arg("positive_scores"), py::arg("negative_scores"));
}
