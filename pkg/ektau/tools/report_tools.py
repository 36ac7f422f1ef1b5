"""
Report generation tools — Markdown and PDF verification reports.

Both builders take the same section list: ``heading``, ``content``, an optional
``passed`` flag (shown in the overview) and optional ``rows`` rendered as a table.
"""

from __future__ import annotations

from fpdf import FPDF
from fpdf.fonts import FontFace

from ..core.errors import error_result
from ..utils.state_manager import get_output_path, write_text_atomic


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def _columns(rows: list[dict]) -> list[str]:
    seen: dict[str, None] = {}
    for row in rows:
        seen.update(dict.fromkeys(row))
    return list(seen)


def _markdown_table(columns: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return lines


def _overview(sections: list[dict]) -> list[list[str]]:
    return [[s.get("heading", "Section"), "PASS" if s["passed"] else "FAIL"]
            for s in sections if "passed" in s]


def generate_markdown_report(title: str, sections: list[dict], filename: str = "verification.md") -> dict:
    """Generate a Markdown report from structured sections.

    Args:
        title: Report title.
        sections: Dicts with 'heading', 'content' and optional 'passed' / 'rows' keys.
        filename: Output file name inside the output directory.

    Returns:
        dict: Status and file path of the generated Markdown report.
    """
    try:
        lines = [f"# {title}", ""]
        overview = _overview(sections)
        if overview:
            lines += _markdown_table(["check", "result"], overview) + [""]

        for section in sections:
            lines += [f"## {section.get('heading', 'Section')}", "", section.get("content", ""), ""]
            rows = section.get("rows") or []
            if rows:
                columns = _columns(rows)
                lines += _markdown_table(columns, [[_fmt(r.get(c)) for c in columns] for r in rows]) + [""]

        md_content = "\n".join(lines)
        path = write_text_atomic(filename, md_content)
        return {"status": "success", "report_path": path, "format": "markdown",
                "report_preview": md_content[:1000]}
    except Exception as e:
        return error_result(e)


def _latin1(text) -> str:
    # core PDF fonts only cover latin-1
    return str(text).encode("latin-1", "replace").decode("latin-1")


def _pdf_table(pdf: FPDF, columns: list[str], rows: list[list[str]], font_size: int = 7):
    pdf.set_font("Courier", "", font_size)
    with pdf.table(headings_style=FontFace(emphasis="BOLD"), text_align="LEFT",
                   line_height=font_size * 0.55) as table:
        table.row([_latin1(c) for c in columns])
        for values in rows:
            table.row([_latin1(v) for v in values])


def generate_pdf_report(title: str, sections: list[dict], filename: str = "verification.pdf") -> dict:
    """Generate a PDF report: an overview table, then one block per section.

    Args:
        title: Report title.
        sections: Dicts with 'heading', 'content' and optional 'passed' / 'rows' keys.
        filename: Output file name inside the output directory.

    Returns:
        dict: Status, file path and page count of the generated PDF.
    """
    try:
        pdf = FPDF()
        pdf.set_auto_page_break(auto=True, margin=15)
        pdf.add_page()
        pdf.set_font("Helvetica", "B", 18)
        pdf.cell(0, 20, text=_latin1(title), new_x="LMARGIN", new_y="NEXT", align="C")

        overview = _overview(sections)
        if overview:
            _pdf_table(pdf, ["check", "result"], overview, font_size=9)
            pdf.ln(6)

        for section in sections:
            pdf.set_font("Helvetica", "B", 12)
            pdf.multi_cell(0, 7, text=_latin1(section.get("heading", "Section")), new_x="LMARGIN", new_y="NEXT")
            pdf.set_font("Helvetica", "", 9)
            pdf.multi_cell(0, 5, text=_latin1(section.get("content", "")), new_x="LMARGIN", new_y="NEXT")
            pdf.ln(1)
            rows = section.get("rows") or []
            if rows:
                columns = _columns(rows)
                _pdf_table(pdf, columns, [[_fmt(r.get(c)) for c in columns] for r in rows])
            pdf.ln(4)

        path = get_output_path(filename)
        pdf.output(path)
        return {"status": "success", "report_path": path, "format": "pdf", "pages": pdf.pages_count}
    except Exception as e:
        return error_result(e)
