"""CSV output. Formatting is fixed so files are byte-identical across runs."""

import os

HEADER = "t_us,C_AF1,C_AF2,C_F1F2,discarded_weight,purity,flags"
PHASE_SPACE_HEADER = "t_us,re_alpha_e,im_alpha_e,re_alpha_g,im_alpha_g,chord"


def format_number(value):
    text = f"{float(value):.12g}"
    return "0" if text == "-0" else text


def format_label(value):
    """Compact form used in file names: 0.5, 1, 0.05, or 0.5+0.1j."""
    value = complex(value)
    if value.imag == 0:
        return f"{value.real:g}"
    return f"{value.real:g}{value.imag:+g}j"


def canonical_name(alpha, beta, g, q):
    """File name of one sweep point, e.g. ``a0.5_b1_g0.05_q0.csv``."""
    return f"a{format_label(alpha)}_b{format_label(beta)}_g{format_label(g)}_q{format_label(q)}.csv"


def format_record(record):
    numbers = (
        record.t,
        record.C_AF1,
        record.C_AF2,
        record.C_F1F2,
        record.discarded_weight,
        record.purity,
    )
    return ",".join([format_number(v) for v in numbers] + [";".join(record.flags)])


def _write_lines(path, header, lines):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        f.write(header + "\n")
        for line in lines:
            f.write(line + "\n")
    return path


def write_records(path, records):
    return _write_lines(path, HEADER, (format_record(r) for r in records))


def write_phase_space(path, rows):
    return _write_lines(
        path, PHASE_SPACE_HEADER, (",".join(format_number(v) for v in row) for row in rows)
    )
