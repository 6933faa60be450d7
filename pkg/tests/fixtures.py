"""Shared design fixtures used across the test suite."""

from hdldiff.parser import parse

# Three registers updated on each rising edge; reg6 samples reg5's
# pre-edge value under non-blocking assignment.
THREE_REG_SHIFT = """\
module top(input wire clk);
  reg reg4;
  reg reg5;
  reg reg6;
  always @(posedge clk) begin
    reg4 <= 1'b0;
    reg5 <= 1'b1;
    reg6 <= reg5;
  end
endmodule
"""

# Same design with the reg5/reg6 chain rewritten to blocking assignments.
THREE_REG_SHIFT_BLOCKING = """\
module top(input wire clk);
  reg reg4;
  reg reg5;
  reg reg6;
  always @(posedge clk) begin
    reg4 <= 1'b0;
    reg5 = 1'b1;
    reg6 = reg5;
  end
endmodule
"""

# A loop whose guard fails at entry: the body never executes.
UNREACHABLE_LOOP = """\
module top(input wire clk);
  reg [7:0] acc;
  integer i;
  always @(posedge clk) begin
    acc <= 8'h01;
    for (i = 5; i < 3; i = i + 1) begin
      acc <= 8'hff;
    end
    acc <= acc ^ 8'h01;
  end
endmodule
"""

# An if/else with both branches populated; the condition is true on
# every edge once lit is committed.
BRANCH_PAIR = """\
module top(input wire clk);
  reg [1:0] lit;
  reg [1:0] a;
  reg [1:0] b;
  always @(posedge clk) begin
    lit <= 2'h2;
    if (lit == 2'h2) begin
      a <= 2'h1;
    end else begin
      b <= 2'h3;
    end
  end
endmodule
"""

# A loop that iterates eight times per block execution.
EIGHT_LOOP = """\
module top(input wire clk);
  reg [7:0] acc;
  integer i;
  always @(posedge clk) begin
    acc <= 8'h00;
    for (i = 0; i < 8; i = i + 1) begin
      acc <= acc + 8'h01;
    end
  end
endmodule
"""

# Two always blocks with a foldable region above the second one.
FOLD_TWO_BLOCKS = """\
module top(input wire clk);
  reg r1;
  reg r2;
  reg r3;
  always @(posedge clk) begin
    r1 <= 1'b0;
    r1 <= 1'b1;
    r1 <= 1'b0;
    r1 <= 1'b1;
  end
  reg s1;
  reg s2;
  always @(posedge clk) begin
    s1 <= 1'b1;
    s2 <= s1;
    s2 <= ~s2;
  end
endmodule
"""

# A comment line directly above an executable statement (sliding site).
COMMENT_SLIDE = """\
module top(input wire clk);
  reg a;
  // update the register each edge
  always @(posedge clk) begin
    a <= ~a;
    a <= 1'b1;
  end
endmodule
"""

# reg xfer is written in the first block and read by a later block:
# an assignment-conversion site whose value is consumed downstream.
CROSS_BLOCK_READ = """\
module top(input wire clk);
  reg xfer;
  reg sink;
  always @(posedge clk) begin
    xfer <= 1'b1;
  end
  always @(posedge clk) begin
    sink <= xfer;
  end
endmodule
"""


def unit(text, **kw):
    return parse(text, **kw)
