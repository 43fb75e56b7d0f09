use std::collections::BTreeMap;

/// Parses `svg` and lists every element that carries an id, in document
/// order, followed by element counts per tag and class.
pub fn digest(svg: &str) -> Result<String, String> {
    let doc = roxmltree::Document::parse(svg).map_err(|e| format!("not well-formed: {e}"))?;
    let mut ids = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for n in doc.descendants().filter(|n| n.is_element()) {
        let tag = n.tag_name().name();
        let class = n.attribute("class").unwrap_or("");
        if let Some(id) = n.attribute("id") {
            ids.push(format!("{tag} #{id} .{class}"));
        }
        *counts.entry(format!("{tag} .{class}")).or_default() += 1;
    }
    let mut out = ids.join("\n");
    for (k, c) in counts {
        out.push_str(&format!("\ncount {k} {c}"));
    }
    out.push('\n');
    Ok(out)
}

/// Attribute `attr` of the element with id `id`.
pub fn attr(svg: &str, id: &str, attr: &str) -> Option<String> {
    let doc = roxmltree::Document::parse(svg).ok()?;
    let node = doc.descendants().find(|n| n.attribute("id") == Some(id))?;
    node.attribute(attr).map(str::to_string)
}

pub fn count_class(svg: &str, class: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).unwrap();
    doc.descendants()
        .filter(|n| n.attribute("class").is_some_and(|c| c.split(' ').any(|x| x == class)))
        .count()
}
