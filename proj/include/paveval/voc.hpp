#pragma once

#include <string>
#include <string_view>

#include "paveval/dataset.hpp"
#include "paveval/detail/numfmt.hpp"
#include "paveval/detail/xml.hpp"

namespace paveval {

// Reads a Pascal VOC annotation document. Pixels are not touched; image size
// comes from <size>. Class names match case-insensitively.
inline ImageRecord parse_voc(std::string_view xml_text, const std::string& image_id) {
    const xml::Element root = xml::parse(xml_text);
    if (root.name != "annotation") {
        throw ParseError("line " + std::to_string(root.line) +
                         ": expected <annotation> root, found <" + root.name + ">");
    }
    const xml::Element& size = root.require("size");
    ImageRecord record(image_id,
                       static_cast<int>(detail::parse_int(size.require("width").text, "<width>")),
                       static_cast<int>(detail::parse_int(size.require("height").text, "<height>")));

    for (const auto& child : root.children) {
        if (child.name != "object") continue;
        const std::string& name = child.require("name").text;
        const auto label = class_from_name(name);
        if (!label) {
            throw ValidationError("line " + std::to_string(child.line) +
                                  ": unknown class name '" + name + "'");
        }
        const xml::Element& box = child.require("bndbox");
        record.annotations.emplace_back(
            BBox(detail::parse_number(box.require("xmin").text, "<xmin>"),
                 detail::parse_number(box.require("ymin").text, "<ymin>"),
                 detail::parse_number(box.require("xmax").text, "<xmax>"),
                 detail::parse_number(box.require("ymax").text, "<ymax>")),
            *label);
    }
    record.validate();
    return record;
}

// Inverse of parse_voc on (size, annotations). Objects are written in input
// order; coordinates keep full precision so the round trip is exact.
inline std::string write_voc(const ImageRecord& record) {
    record.validate();
    std::string out;
    out += "<annotation>\n";
    out += "  <filename>" + xml::escape(record.image_id) + "</filename>\n";
    out += "  <size>\n";
    out += "    <width>" + std::to_string(record.width) + "</width>\n";
    out += "    <height>" + std::to_string(record.height) + "</height>\n";
    out += "    <depth>3</depth>\n";
    out += "  </size>\n";
    for (const auto& a : record.annotations) {
        out += "  <object>\n";
        out += "    <name>" + std::string(class_name(a.label)) + "</name>\n";
        out += "    <bndbox>\n";
        out += "      <xmin>" + detail::format_number(a.bbox.x_min) + "</xmin>\n";
        out += "      <ymin>" + detail::format_number(a.bbox.y_min) + "</ymin>\n";
        out += "      <xmax>" + detail::format_number(a.bbox.x_max) + "</xmax>\n";
        out += "      <ymax>" + detail::format_number(a.bbox.y_max) + "</ymax>\n";
        out += "    </bndbox>\n";
        out += "  </object>\n";
    }
    out += "</annotation>\n";
    return out;
}

}  // namespace paveval
