import random

import pytest

from hdldiff.parser import ParseError, parse
from hdldiff.source import (
    AlwaysBlock, ContinuousAssign, LineClass, NonBlockingAssign, render,
    units_equal, walk_statements,
)

import fixtures


def test_minimal_module():
    unit = parse("module m(output wire o);\n  assign o = 1'b0;\nendmodule\n")
    assert len(unit.main.modules) == 1
    mod = unit.main.modules[0]
    assigns = [i for i in mod.items if isinstance(i, ContinuousAssign)]
    assert len(assigns) == 1
    assert assigns[0].target == "o"


def test_three_reg_always_block():
    unit = parse(fixtures.THREE_REG_SHIFT)
    mod = unit.main.modules[0]
    blocks = [i for i in mod.items if isinstance(i, AlwaysBlock)]
    assert len(blocks) == 1
    stmts = [s for s in walk_statements(blocks[0].body)
             if isinstance(s, NonBlockingAssign)]
    assert len(stmts) == 3
    assert [s.target for s in stmts] == ["reg4", "reg5", "reg6"]
    # statements sit on the lines they were written on
    assert [s.loc.line for s in stmts] == [6, 7, 8]


def test_malformed_module_reports_location():
    with pytest.raises(ParseError) as exc:
        parse("module m(; endmodule\n")
    assert exc.value.line == 1


def test_parse_render_roundtrip_fixtures():
    for text in (fixtures.THREE_REG_SHIFT, fixtures.UNREACHABLE_LOOP,
                 fixtures.BRANCH_PAIR, fixtures.EIGHT_LOOP,
                 fixtures.FOLD_TWO_BLOCKS, fixtures.COMMENT_SLIDE,
                 fixtures.CROSS_BLOCK_READ):
        unit = parse(text)
        rendered = render(unit)
        assert units_equal(parse(rendered), unit)


def test_blank_line_renders_blank():
    text = "module m(input wire clk);\n\n  reg a;\nendmodule\n"
    unit = parse(text)
    assert unit.main.line_class(2) is LineClass.BLANK
    assert render(unit).split("\n")[1] == ""


def test_comment_line_preserved_verbatim():
    unit = parse(fixtures.COMMENT_SLIDE)
    assert unit.main.line_class(3) is LineClass.COMMENT
    assert render(unit).split("\n")[2] == "  // update the register each edge"


def test_line_classes():
    unit = parse(fixtures.COMMENT_SLIDE)
    main = unit.main
    assert main.line_class(1) is LineClass.DECLARATION  # module header
    assert main.line_class(2) is LineClass.DECLARATION  # reg decl
    assert main.line_class(4) is LineClass.DECLARATION  # always header
    assert main.line_class(5) is LineClass.EXECUTABLE
    assert main.line_class(6) is LineClass.EXECUTABLE
    assert main.executable_lines() == [5, 6]


def test_trailing_comment_keeps_code_class():
    text = "module m(input wire clk);\n  reg a;  // state bit\n  always @(posedge clk)\n    a <= 1'b1;\nendmodule\n"
    unit = parse(text)
    assert unit.main.line_class(2) is LineClass.DECLARATION
    rendered = render(unit)
    assert "// state bit" in rendered.split("\n")[1]
    assert units_equal(parse(rendered), unit)


def test_includes_require_file_text():
    text = ('`include "extras.vh"\nmodule m(input wire clk);\n  reg a;\n'
            "  always @(posedge clk)\n    a <= 1'b1;\nendmodule\n")
    with pytest.raises(ParseError):
        parse(text)
    unit = parse(text, include_files={"extras.vh": "wire spare_net;\n"})
    assert len(unit.files) == 2
    assert unit.files[1].decls[0].names == ("spare_net",)


def test_rejects_out_of_subset_constructs():
    bad = [
        "module m(input wire clk);\n  initial a = 1;\nendmodule\n",
        "module m(input wire clk);\n  always @(negedge clk) a <= 1'b0;\nendmodule\n",
        "module m(input wire clk);\n  reg a;\n  always @(posedge clk)\n    a <= 1'bx;\nendmodule\n",
        "module m(input wire clk);\n  casez (x)\nendmodule\n",
    ]
    for text in bad:
        with pytest.raises(ParseError):
            parse(text)


def test_for_loop_variable_must_match():
    text = ("module m(input wire clk);\n  integer i;\n  integer j;\n  reg a;\n"
            "  always @(posedge clk)\n    for (i = 0; i < 4; j = j + 1)\n      a <= 1'b0;\n"
            "endmodule\n")
    with pytest.raises(ParseError):
        parse(text)


def test_line_fidelity_under_blank_insertion():
    base = fixtures.THREE_REG_SHIFT
    lines = base.split("\n")
    for k in (1, 3):
        shifted = "\n".join(lines[:1] + [""] * k + lines[1:])
        unit = parse(shifted)
        stmts = [s for s in walk_statements(unit.main.modules[0].items[-1].body)
                 if isinstance(s, NonBlockingAssign)]
        assert [s.loc.line for s in stmts] == [6 + k, 7 + k, 8 + k]


def test_roundtrip_random_whitespace_padding():
    rng = random.Random(11)
    lines = fixtures.EIGHT_LOOP.split("\n")
    for _ in range(20):
        padded = []
        for ln in lines:
            padded.append(ln)
            if rng.random() < 0.3:
                padded.append("")
            if rng.random() < 0.2:
                padded.append("  // filler comment")
        text = "\n".join(padded)
        unit = parse(text)
        assert units_equal(parse(render(unit)), unit)
