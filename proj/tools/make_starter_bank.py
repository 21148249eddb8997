#!/usr/bin/env python3
"""Regenerates data/banks/*.questions.json.

Every lesson gets a few fixed concept questions plus generated variants of
code-reading families whose answers are computed here. C semantics assumed:
32-bit int, truncating division, 4-byte int and float, 8-byte double.
Output is deterministic for a given seed.
"""

import argparse
import json
import math
import random
from pathlib import Path

TERM1 = [
    "Programming and C", "Fundamentals of C Programming", "Data Types", "Numeral Systems",
    "Variables and Constants", "Data Type Transformations", "Operators", "Basic Input / Output Functions",
    "Program Control", "Loops - 1 (For)", "Loops - 2 (Do... While and While)", "Preprocessors",
    "Functions", "Arrays",
]
TERM2 = [
    "Pointers", "Sorting Algorithms - 1 (Selection, Insertion)", "Sorting Algorithms - 2 (Bubble, Shell, Quick)",
    "Searching Algorithms", "Structural Data Types", "File Operators - 1 (Text)", "File Operators - 2 (Binary)",
    "Determiners", "Dynamic Memory Operations", "Graphic", "Ports",
    "Basic Functions in C - 1 (Display, String)", "Basic Functions in C - 2 (Math, Number, Date, Time)",
    "Basic Functions in C - 3 (Directory, Data Type Trans.)",
]

# (stem, correct, [four distractors], difficulty)
CONCEPTS = {
    "T1-01": [
        ("Which program turns C source code into machine code?", "A compiler",
         ["A linker script", "A text editor", "A debugger", "An interpreter shell"], 1),
        ("Which function is the entry point of every C program?", "main",
         ["start", "init", "program", "run"], 1),
        ("What ends every C statement?", "A semicolon",
         ["A colon", "A period", "A newline", "A closing brace"], 1),
    ],
    "T1-02": [
        ("Which header declares printf and scanf?", "stdio.h",
         ["stdlib.h", "string.h", "math.h", "conio.h"], 1),
        ("Which characters start a single-line comment in C99?", "//",
         ["#", "--", "/*", ";;"], 1),
        ("What does `return 0;` at the end of main report to the operating system?", "Successful termination",
         ["A runtime error", "The number of lines printed", "An infinite loop", "Nothing at all"], 2),
    ],
    "T1-03": [
        ("Which type stores a single character?", "char", ["string", "chr", "byte", "letter"], 1),
        ("Which type is best for a value like 3.75?", "float", ["int", "char", "unsigned", "short"], 1),
        ("What is the range of a signed 8-bit char?", "-128 to 127",
         ["0 to 255", "-127 to 127", "-256 to 255", "0 to 127"], 3),
    ],
    "T1-04": [
        ("How many distinct digits does the hexadecimal system use?", "16", ["8", "10", "15", "2"], 1),
        ("Which prefix marks a hexadecimal literal in C?", "0x", ["0b", "#", "0o", "h"], 1),
        ("Which prefix marks an octal literal in C?", "0", ["0o", "0x", "o", "8#"], 2),
    ],
    "T1-05": [
        ("Which keyword makes a variable read-only after initialisation?", "const",
         ["static", "final", "readonly", "fixed"], 1),
        ("Which identifier is valid in C?", "_total2", ["2total", "total-2", "int", "total 2"], 2),
        ("Where is a variable declared inside a block visible?", "Only inside that block",
         ["In the whole file", "In every function", "Only in main", "After the block ends"], 2),
    ],
    "T1-06": [
        ("What does an explicit cast such as `(int)x` do?", "Converts the value to int",
         ["Declares a new variable", "Rounds to the nearest even", "Checks the type at runtime", "Nothing"], 1),
        ("In `int + double`, which operand is converted?", "The int becomes double",
         ["The double becomes int", "Both become float", "Neither", "Both become long"], 2),
        ("What happens to the fraction when 7.9 is assigned to an int?", "It is discarded (7)",
         ["It rounds up (8)", "It is a compile error", "It rounds to even (8)", "It wraps to 0"], 2),
    ],
    "T1-07": [
        ("Which operator gives the remainder of integer division?", "%", ["/", "//", "mod", "\\"], 1),
        ("Which operator tests equality?", "==", ["=", "===", ":=", "!="], 1),
        ("Which operator has the highest precedence?", "*", ["+", "&&", "=", "||"], 2),
    ],
    "T1-08": [
        ("Which conversion prints an int with printf?", "%d", ["%f", "%c", "%s", "%p"], 1),
        ("Why does scanf take `&x` rather than `x`?", "It needs the address to store the value",
         ["To print x", "To copy x", "It is optional style", "To make x constant"], 2),
        ("Which escape sequence moves to a new line?", "\\n", ["\\t", "\\r\\t", "/n", "\\0"], 1),
    ],
    "T1-09": [
        ("What does `break` do inside a switch case?", "Leaves the switch",
         ["Restarts the switch", "Skips the next case only", "Ends the program", "Nothing"], 1),
        ("Which value counts as false in a C condition?", "0", ["1", "-1", "Any negative value", "'0'"], 1),
        ("Which label runs when no case matches?", "default", ["else", "otherwise", "none", "final"], 1),
    ],
    "T1-10": [
        ("Which part of `for (a; b; c)` runs exactly once?", "a", ["b", "c", "The body", "All of them"], 1),
        ("When is the condition of a for loop checked?", "Before every iteration",
         ["After every iteration", "Only once", "Only after break", "Never"], 2),
        ("What does `continue` do in a for loop?", "Jumps to the step expression",
         ["Leaves the loop", "Restarts from the init", "Ends the program", "Skips two iterations"], 3),
    ],
    "T1-11": [
        ("How many times does a do-while body run at least?", "Once", ["Zero times", "Twice", "It depends", "Never"], 1),
        ("Which loop checks its condition after the body?", "do-while", ["while", "for", "switch", "goto"], 1),
        ("What makes `while (1) { }` stop?", "Nothing; it loops forever",
         ["It runs once", "The compiler", "Integer overflow", "A timeout in C"], 2),
    ],
    "T1-12": [
        ("When are #define macros expanded?", "Before compilation",
         ["At runtime", "At link time", "When called", "After main returns"], 1),
        ("Which directive includes a header file?", "#include", ["#import", "#using", "#header", "#require"], 1),
        ("Why should macro parameters be parenthesised?", "To keep operator precedence correct",
         ["To make them faster", "It is required syntax", "To make them constant", "To allow recursion"], 3),
    ],
    "T1-13": [
        ("What keyword returns a value from a function?", "return", ["yield", "give", "exit", "break"], 1),
        ("How are int arguments passed to a C function?", "By value (copied)",
         ["By reference", "By name", "As pointers automatically", "Globally"], 2),
        ("What is the return type of a function that returns nothing?", "void", ["null", "none", "empty", "int"], 1),
    ],
    "T1-14": [
        ("What is the index of the first element of a C array?", "0", ["1", "-1", "It depends", "The size"], 1),
        ("For `int a[10];` which index is out of bounds?", "10", ["0", "9", "5", "1"], 1),
        ("Which call finds the number of elements of array `a` in its scope?", "sizeof a / sizeof a[0]",
         ["length(a)", "a.size()", "sizeof(a[0])", "strlen(a)"], 3),
    ],
    "T2-01": [
        ("What does `&x` give?", "The address of x", ["The value of x", "A copy of x", "x squared", "Nothing"], 1),
        ("What does `*p` give for a pointer p?", "The value p points to",
         ["The address of p", "p multiplied", "The size of p", "A new pointer"], 1),
        ("Which value marks a pointer that points nowhere?", "NULL", ["0xFF", "-1", "void", "EOF"], 1),
    ],
    "T2-02": [
        ("Selection sort repeatedly...", "Moves the smallest remaining element to the front",
         ["Swaps neighbours", "Splits around a pivot", "Merges halves", "Inserts at random"], 1),
        ("What is the worst-case comparison count order of insertion sort?", "n squared",
         ["n", "n log n", "log n", "constant"], 3),
        ("Insertion sort is fastest on input that is...", "Already nearly sorted",
         ["Reversed", "Random", "All distinct", "Very large"], 2),
    ],
    "T2-03": [
        ("Bubble sort compares...", "Adjacent elements", ["The first and last", "Random pairs", "Pivots", "Halves"], 1),
        ("Quick sort partitions the array around a...", "Pivot", ["Gap", "Bucket", "Heap", "Key list"], 1),
        ("Shell sort improves insertion sort by...", "Comparing elements a gap apart",
         ["Using a pivot", "Merging runs", "Counting keys", "Using a heap"], 3),
    ],
    "T2-04": [
        ("Binary search requires the array to be...", "Sorted", ["Unsorted", "Even length", "Unique", "Small"], 1),
        ("Linear search on n elements needs at most how many comparisons?", "n",
         ["log n", "n squared", "1", "n / 2"], 1),
        ("What is the order of binary search?", "log n", ["n", "n log n", "1", "n squared"], 2),
    ],
    "T2-05": [
        ("Which keyword defines a structure type?", "struct", ["record", "class", "type", "object"], 1),
        ("How do you reach member `x` through a pointer `p` to a struct?", "p->x", ["p.x", "*p.x", "p::x", "&p.x"], 2),
        ("Can a struct contain members of different types?", "Yes",
         ["No", "Only ints", "Only pointers", "Only with typedef"], 1),
    ],
    "T2-06": [
        ("Which fopen mode opens a text file for appending?", "\"a\"", ["\"w\"", "\"r\"", "\"x\"", "\"rw\""], 1),
        ("What does fopen return when the file cannot be opened?", "NULL", ["0xFFFF", "EOF", "-1", "An empty file"], 1),
        ("What does opening an existing file with \"w\" do?", "Truncates it to zero length",
         ["Appends to it", "Fails", "Opens it read-only", "Copies it"], 2),
    ],
    "T2-07": [
        ("Which function writes raw bytes to a binary file?", "fwrite", ["fprintf", "fputs", "write_bin", "putc_all"], 1),
        ("What does fread return?", "The number of items read",
         ["The number of bytes in the file", "A pointer", "Always 0", "The file name"], 2),
        ("Which mode opens a binary file for reading?", "\"rb\"", ["\"r+\"", "\"br\"", "\"bin\"", "\"w\""], 1),
    ],
    "T2-08": [
        ("Which storage class keeps a local variable's value between calls?", "static",
         ["auto", "register", "volatile", "const"], 2),
        ("Which specifier declares a variable defined in another file?", "extern",
         ["static", "global", "import", "auto"], 2),
        ("What is the default storage class of a local variable?", "auto", ["static", "extern", "register", "global"], 2),
    ],
    "T2-09": [
        ("Which function releases memory obtained from malloc?", "free", ["delete", "release", "dispose", "unmalloc"], 1),
        ("What does malloc return when it cannot allocate?", "NULL", ["0xFF", "-1", "An empty block", "EOF"], 1),
        ("How does calloc differ from malloc?", "It zeroes the memory",
         ["It is faster", "It never fails", "It frees memory", "It resizes memory"], 2),
    ],
    "T2-10": [
        ("In screen coordinates, where is (0, 0) usually?", "Top-left corner",
         ["Bottom-left corner", "Centre", "Bottom-right corner", "Top-right corner"], 1),
        ("A pixel colour in 24-bit RGB uses how many bits per channel?", "8", ["4", "16", "24", "32"], 2),
        ("Which value is pure red in 0xRRGGBB form?", "0xFF0000", ["0x00FF00", "0x0000FF", "0xFFFFFF", "0x000000"], 1),
    ],
    "T2-11": [
        ("Which operator sets bits in a port value?", "|", ["&", "^", "~", "!"], 1),
        ("Which operator clears bits when used with an inverted mask?", "&", ["|", "^", "<<", "+"], 2),
        ("Which operator toggles bits?", "^", ["|", "&", "~", ">>"], 2),
    ],
    "T2-12": [
        ("Which character ends every C string?", "'\\0'", ["'\\n'", "' '", "'0'", "EOF"], 1),
        ("Which function copies one string into another?", "strcpy", ["strcat", "strcmp", "strdup2", "copy"], 1),
        ("What does strcmp return for equal strings?", "0", ["1", "-1", "The length", "true"], 1),
    ],
    "T2-13": [
        ("Which header declares sqrt and pow?", "math.h", ["stdlib.h", "stdio.h", "numbers.h", "float.h"], 1),
        ("Which function returns the current calendar time?", "time", ["clock_now", "date", "now", "gettime"], 2),
        ("What does rand() % 6 return?", "A value from 0 to 5", ["1 to 6", "0 to 6", "Always 6", "A float"], 2),
    ],
    "T2-14": [
        ("Which function converts a string to an int?", "atoi", ["itoa", "strtoi", "toint", "parseInt"], 1),
        ("Which function converts a string to a double?", "atof", ["atod", "strtoint", "ftoa", "todouble"], 2),
        ("Which header declares atoi?", "stdlib.h", ["string.h", "stdio.h", "ctype.h", "math.h"], 2),
    ],
}


def c_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_mod(a, b):
    return a - c_div(a, b) * b


def distractors(rng, correct, pool):
    """Four distinct wrong answers drawn from `pool` (strings)."""
    seen = {correct}
    out = []
    for item in pool:
        if item not in seen:
            seen.add(item)
            out.append(item)
        if len(out) == 4:
            return out
    n = 1
    while len(out) < 4:
        cand = f"{correct} ({n})" if not correct.lstrip("-").isdigit() else str(int(correct) + 7 * n)
        if cand not in seen:
            seen.add(cand)
            out.append(cand)
        n += 1
    return out


def near_ints(rng, value, spread=3):
    vals = [value + d for d in range(-spread, spread + 1) if d != 0]
    rng.shuffle(vals)
    return [str(v) for v in vals]


# Each family yields (stem, correct, pool, difficulty) for variant i.

def fam_numeral(rng, i):
    n = rng.randint(5 + 20 * i, 30 + 40 * i)
    base, name, fmt = [(2, "binary", "b"), (16, "hexadecimal", "X"), (8, "octal", "o")][i % 3]
    correct = format(n, fmt)
    pool = [format(n + d, fmt) for d in (1, -1, 2, 4, -2, 8)]
    return f"What is {n} (decimal) in {name}?", correct, pool, 1 + min(4, i // 2)


def fam_assign(rng, i):
    a, b, c = rng.randint(1, 9), rng.randint(1, 9), rng.randint(2, 5)
    x, y = a, b
    x += y
    y = x - y
    x *= c
    stem = f"int x = {a}, y = {b}; x += y; y = x - y; x *= {c}; What is y * 10 + x?"
    v = y * 10 + x
    return stem, str(v), near_ints(rng, v, 4), 2 + i % 4


def fam_cast(rng, i):
    a, b = rng.randint(7, 40), rng.randint(2, 9)
    kind = i % 3
    if kind == 0:
        stem = f"What does printf(\"%d\", {a} / {b}) print?"
        v = str(c_div(a, b))
        pool = [str(c_div(a, b) + 1), f"{a / b:.2f}", str(c_mod(a, b)), str(c_div(a, b) - 1)]
        return stem, v, pool, 1 + i // 3
    if kind == 1:
        stem = f"What does printf(\"%.2f\", (float){a} / {b}) print?"
        v = f"{a / b:.2f}"
        pool = [f"{c_div(a, b):.2f}", f"{a / b + 0.01:.2f}", str(c_div(a, b)), f"{a / b:.1f}"]
        return stem, v, pool, 2 + i // 3
    stem = f"What does printf(\"%d\", (int)({a} / {b}.0 * 10)) print?"
    v = str(int(a / b * 10))
    return stem, v, near_ints(rng, int(v), 3), 3 + i // 4


def fam_operators(rng, i):
    a, b, c = rng.randint(2, 20), rng.randint(2, 9), rng.randint(2, 7)
    exprs = [
        (f"{a} + {b} * {c}", a + b * c),
        (f"({a} + {b}) * {c}", (a + b) * c),
        (f"{a} % {b} + {c}", c_mod(a, b) + c),
        (f"{a} / {b} * {c}", c_div(a, b) * c),
        (f"{a} > {b} && {b} > {c}", int(a > b and b > c)),
        (f"{a} - {b} - {c}", a - b - c),
        (f"-{a} / {b}", c_div(-a, b)),
        (f"-{a} % {b}", c_mod(-a, b)),
        (f"{a} << {c % 4}", a << (c % 4)),
    ]
    e, v = exprs[i % len(exprs)]
    return f"What is the value of the C expression `{e}`?", str(v), near_ints(rng, v, 3), 1 + (i * 4) // 9


def fam_printf(rng, i):
    x = round(rng.uniform(1, 99), 3)
    w = rng.randint(5, 8)
    fmts = [
        (f"%.1f", f"{x:.1f}"),
        (f"%.2f", f"{x:.2f}"),
        (f"%{w}.1f", f"{x:{w}.1f}"),
        (f"%-{w}d|", f"{int(x):<{w}d}|"),
        (f"%0{w}d", f"{int(x):0{w}d}"),
    ]
    f, v = fmts[i % len(fmts)]
    arg = str(int(x)) if "d" in f else str(x)
    stem = f"What does printf(\"{f}\", {arg}) print? (quotes mark the output)"
    correct = f"\"{v}\""
    pool = [f"\"{v.strip()}\"", f"\"{x}\"", f"\"{x:.3f}\"", f"\"{int(x)}\"", f"\"{v} \"", f"\" {v}\""]
    return stem, correct, pool, 1 + i // 2


def fam_branch(rng, i):
    a, b = rng.randint(-10, 10), rng.randint(-10, 10)
    if i % 2 == 0:
        stem = (f"int a = {a}, b = {b}; if (a > b) printf(\"A\"); else if (a == b) printf(\"E\"); "
                f"else printf(\"B\"); What is printed?")
        v = "A" if a > b else "E" if a == b else "B"
        return stem, v, ["A", "B", "E", "AB", "nothing"], 1 + i // 4
    k = rng.randint(1, 3)
    out = ""
    for case in range(k, 4):
        out += str(case)
        if case == 2:
            break
    if not out:
        out = "none"
    stem = (f"int k = {k}; switch (k) {{ case 1: printf(\"1\"); case 2: printf(\"2\"); break; "
            f"case 3: printf(\"3\"); }} What is printed?")
    return stem, out, ["1", "2", "3", "12", "123", "23"], 3 + i // 5


def fam_for(rng, i):
    s, e, k = rng.randint(0, 5), rng.randint(10, 30), rng.randint(1, 4)
    count = len(range(s, e, k))
    total = sum(range(s, e, k))
    if i % 2 == 0:
        stem = f"How many times does the body of `for (i = {s}; i < {e}; i += {k})` run?"
        return stem, str(count), near_ints(rng, count, 2), 1 + i // 3
    stem = f"int s = 0; for (i = {s}; i < {e}; i += {k}) s += i; What is s?"
    return stem, str(total), near_ints(rng, total, 4) + [str(total + e)], 2 + i // 3


def fam_while(rng, i):
    n, d = rng.randint(50, 5000), rng.choice([2, 3, 10])
    c, m = 0, n
    while m > 0:
        m //= d
        c += 1
    if i % 2 == 0:
        stem = f"int n = {n}, c = 0; while (n > 0) {{ n /= {d}; c++; }} What is c?"
        return stem, str(c), near_ints(rng, c, 2), 2 + i // 3
    x = rng.randint(1, 4)
    y = x
    runs = 0
    while True:
        y += 3
        runs += 1
        if not y < x:
            break
    stem = f"int x = {x}, y = {x}, r = 0; do {{ y += 3; r++; }} while (y < x); What is r?"
    return stem, str(runs), ["0", "2", "3", str(x), "infinite"], 1 + i // 3


def fam_macro(rng, i):
    a, b = rng.randint(1, 6), rng.randint(1, 6)
    if i % 3 == 0:
        stem = f"#define SQ(x) x * x. What is SQ({a} + {b})?"
        v = a + b * a + b
        pool = [str((a + b) ** 2), str(a * a + b * b), str(v + 1), str(v - 1)]
        return stem, str(v), pool, 3 + i // 4
    if i % 3 == 1:
        stem = f"#define SQ(x) ((x) * (x)). What is SQ({a} + {b})?"
        v = (a + b) ** 2
        pool = [str(a + b * a + b), str(a * a + b * b), str(v + 1), str(2 * (a + b))]
        return stem, str(v), pool, 2 + i // 4
    stem = f"#define MAX(p, q) ((p) > (q) ? (p) : (q)). What is MAX({a}, {b}) * 2?"
    v = max(a, b) * 2
    return stem, str(v), near_ints(rng, v, 3), 1 + i // 3


def fam_recursion(rng, i):
    n = rng.randint(3, 7)
    if i % 3 == 0:
        stem = f"int f(int n) {{ return n <= 1 ? 1 : n * f(n - 1); }} What is f({n})?"
        v = math.factorial(n)
        return stem, str(v), [str(math.factorial(n - 1)), str(math.factorial(n + 1)), str(v + n), str(n * n)], 2 + i // 4
    if i % 3 == 1:
        fib = [0, 1]
        while len(fib) <= n + 2:
            fib.append(fib[-1] + fib[-2])
        stem = f"int g(int n) {{ return n < 2 ? n : g(n - 1) + g(n - 2); }} What is g({n})?"
        return stem, str(fib[n]), [str(fib[n - 1]), str(fib[n + 1]), str(fib[n] + 1), str(n)], 3 + i // 4
    a = rng.randint(1, 9)
    stem = f"void inc(int x) {{ x = x + 1; }} int a = {a}; inc(a); What is a afterwards?"
    return stem, str(a), [str(a + 1), "0", str(a - 1), "undefined"], 1 + i // 3


def fam_array(rng, i):
    arr = [rng.randint(1, 20) for _ in range(5)]
    lit = "{" + ", ".join(map(str, arr)) + "}"
    if i % 3 == 0:
        j, k = rng.randint(0, 4), rng.randint(0, 4)
        v = arr[j] + arr[k]
        return f"int a[] = {lit}; What is a[{j}] + a[{k}]?", str(v), near_ints(rng, v, 3), 1 + i // 4
    if i % 3 == 1:
        v = sum(arr[::2])
        stem = f"int a[] = {lit}, s = 0; for (i = 0; i < 5; i += 2) s += a[i]; What is s?"
        return stem, str(v), [str(sum(arr)), str(sum(arr[1::2])), str(v + 1), str(v - arr[0])], 2 + i // 4
    m = 0
    for idx in range(1, 5):
        if arr[idx] > arr[m]:
            m = idx
    stem = f"int a[] = {lit}, m = 0; for (i = 1; i < 5; i++) if (a[i] > a[m]) m = i; What is m?"
    return stem, str(m), ["0", "1", "2", "3", "4", "5"], 3 + i // 5


def fam_pointer(rng, i):
    arr = [rng.randint(1, 30) for _ in range(5)]
    lit = "{" + ", ".join(map(str, arr)) + "}"
    k = rng.randint(0, 3)
    if i % 3 == 0:
        stem = f"int a[] = {lit}; int *p = a + {k}; What is *(p + 1)?"
        v = arr[k + 1]
        return stem, str(v), [str(arr[k]), str(arr[k] + 1), str(v + 1), str(arr[0])], 2 + i // 4
    if i % 3 == 1:
        x = rng.randint(1, 9)
        stem = f"int x = {x}; int *p = &x; *p += 5; (*p)++; What is x?"
        v = x + 6
        return stem, str(v), near_ints(rng, v, 3), 1 + i // 4
    stem = f"int a[] = {lit}; int *p = a; p += {k}; What is p - a?"
    return stem, str(k), ["0", "1", "2", "3", "4", str(arr[k])], 3 + i // 4


def selection_pass(arr):
    a = list(arr)
    m = min(range(len(a)), key=lambda j: (a[j], j))
    a[0], a[m] = a[m], a[0]
    return a


def insertion_steps(arr, steps):
    a = list(arr)
    for i in range(1, 1 + steps):
        key, j = a[i], i - 1
        while j >= 0 and a[j] > key:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key
    return a


def bubble_pass(arr):
    a = list(arr)
    for j in range(len(a) - 1):
        if a[j] > a[j + 1]:
            a[j], a[j + 1] = a[j + 1], a[j]
    return a


def show(a):
    return "{" + ", ".join(map(str, a)) + "}"


def perturb(rng, a, count):
    out = []
    seen = {show(a)}
    while len(out) < count:
        b = list(a)
        x, y = rng.sample(range(len(b)), 2)
        b[x], b[y] = b[y], b[x]
        if show(b) not in seen:
            seen.add(show(b))
            out.append(show(b))
    return out


def fam_sort1(rng, i):
    arr = rng.sample(range(1, 40), 5)
    if i % 2 == 0:
        v = selection_pass(arr)
        stem = f"After the first pass of selection sort (ascending) on {show(arr)}, the array is?"
        return stem, show(v), [show(arr), show(sorted(arr))] + perturb(rng, v, 4), 2 + i // 3
    steps = 1 + i % 3
    v = insertion_steps(arr, steps)
    stem = f"After {steps} insertion step(s) of insertion sort (ascending) on {show(arr)}, the array is?"
    return stem, show(v), [show(arr), show(sorted(arr))] + perturb(rng, v, 4), 2 + i // 3


def fam_sort2(rng, i):
    arr = rng.sample(range(1, 40), 5 + i % 2)
    v = bubble_pass(arr)
    if i % 2 == 0:
        stem = f"After one bubble sort pass (ascending) on {show(arr)}, the array is?"
        return stem, show(v), [show(arr), show(sorted(arr))] + perturb(rng, v, 4), 1 + i // 3
    count = 0
    a = list(arr)
    for j in range(len(a) - 1):
        if a[j] > a[j + 1]:
            a[j], a[j + 1] = a[j + 1], a[j]
            count += 1
    stem = f"How many swaps does the first bubble sort pass (ascending) make on {show(arr)}?"
    return stem, str(count), ["0", "1", "2", "3", "4", "5", "6"], 2 + i // 3


def fam_search(rng, i):
    n = rng.choice([7, 15, 31, 63, 127])
    if i % 2 == 0:
        v = int(math.floor(math.log2(n))) + 1
        stem = f"At most how many elements does binary search inspect in a sorted array of {n} elements?"
        return stem, str(v), [str(n), str(n // 2), str(v + 1), str(v - 1), str(v * 2)], 2 + i // 3
    arr = sorted(rng.sample(range(1, 60), 7))
    target = arr[rng.randint(0, 6)]
    lo, hi, probes = 0, 6, 0
    while lo <= hi:
        mid = (lo + hi) // 2
        probes += 1
        if arr[mid] == target:
            break
        if arr[mid] < target:
            lo = mid + 1
        else:
            hi = mid - 1
    stem = (f"Binary search (mid = (lo + hi) / 2) for {target} in {show(arr)}: how many elements are "
            f"compared, counting the match?")
    return stem, str(probes), ["1", "2", "3", "4", "5", "7"], 3 + i // 4


def fam_struct(rng, i):
    x, y = rng.randint(1, 20), rng.randint(1, 20)
    dx = rng.randint(1, 5)
    if i % 2 == 0:
        stem = (f"struct pt {{ int x, y; }}; struct pt p = {{{x}, {y}}}; struct pt q = p; q.x += {dx}; "
                f"What is p.x + q.x?")
        v = x + x + dx
        return stem, str(v), [str(2 * (x + dx)), str(x + dx), str(v + 1), str(2 * x)], 2 + i // 3
    stem = (f"struct pt {{ int x, y; }}; struct pt p = {{{x}, {y}}}; struct pt *r = &p; r->y = r->x * {dx}; "
            f"What is p.y?")
    v = x * dx
    return stem, str(v), [str(y), str(y * dx), str(v + x), str(x)], 1 + i // 3


def fam_text_file(rng, i):
    n = rng.randint(2, 9)
    if i % 2 == 0:
        stem = f"for (i = 0; i < {n}; i++) fprintf(f, \"%d\\n\", i); How many lines does the file hold?"
        return stem, str(n), near_ints(rng, n, 2), 1 + i // 3
    stem = (f"A file opened with \"w\" has {n} lines written, is closed, then opened with \"a\" and "
            f"{n + 1} more lines are written. How many lines does it hold?")
    v = 2 * n + 1
    return stem, str(v), [str(n + 1), str(n), str(v + 1), str(v - 1)], 2 + i // 3


def fam_binary_file(rng, i):
    n = rng.randint(2, 12)
    types = [("int", 4), ("double", 8), ("char", 1), ("float", 4)]
    t, size = types[i % 4]
    stem = (f"Assuming sizeof(int) = 4 and sizeof(double) = 8, how many bytes does "
            f"fwrite(buf, sizeof({t}), {n}, f) write?")
    v = n * size
    return stem, str(v), [str(n), str(v + size), str(v * 2), str(size), str(v - size)], 1 + i // 2


def fam_static(rng, i):
    n = rng.randint(2, 6)
    if i % 2 == 0:
        stem = f"int tick(void) {{ static int c = 0; return ++c; }} After calling tick() {n} times, what does the last call return?"
        return stem, str(n), ["1", "0", str(n + 1), str(n - 1)], 2 + i // 3
    stem = f"int tick(void) {{ int c = 0; return ++c; }} After calling tick() {n} times, what does the last call return?"
    return stem, "1", ["0", str(n), str(n + 1), str(n - 1)], 3 + i // 4


def fam_malloc(rng, i):
    n = rng.randint(3, 40)
    types = [("int", 4), ("double", 8), ("char", 1)]
    t, size = types[i % 3]
    stem = f"Assuming sizeof(int) = 4, sizeof(double) = 8: how many bytes does malloc({n} * sizeof({t})) request?"
    v = n * size
    return stem, str(v), [str(n), str(v + size), str(v * 2), str(size)], 1 + i // 2


def fam_pixels(rng, i):
    w, h = rng.choice([(320, 200), (640, 480), (800, 600)])
    x, y = rng.randint(0, w - 1), rng.randint(0, h - 1)
    stem = f"A {w}x{h} screen stores pixels row by row. At what index is pixel (x = {x}, y = {y})?"
    v = y * w + x
    return stem, str(v), [str(x * h + y), str(x * w + y), str(v + 1), str((y + 1) * w + x)], 2 + i // 3


def fam_bits(rng, i):
    v = rng.randint(0, 255)
    b = rng.randint(0, 7)
    ops = [
        (f"0x{v:02X} | (1 << {b})", v | (1 << b)),
        (f"0x{v:02X} & ~(1 << {b})", v & ~(1 << b) & 0xFF),
        (f"0x{v:02X} ^ 0xFF", v ^ 0xFF),
        (f"(0x{v:02X} >> {b}) & 1", (v >> b) & 1),
    ]
    e, r = ops[i % 4]
    pool = [str(r + 1), str(r ^ 1), str(v), str(r + (1 << b)), str(255 - r)]
    return f"For unsigned char values, what is `{e}` in decimal?", str(r), pool, 2 + i // 3


def fam_string(rng, i):
    words = ["tutor", "pointer", "array", "loop", "struct", "printf", "malloc"]
    w1, w2 = rng.sample(words, 2)
    if i % 3 == 0:
        stem = f"What does strlen(\"{w1}\") return?"
        return stem, str(len(w1)), near_ints(rng, len(w1), 2), 1 + i // 4
    if i % 3 == 1:
        stem = f"char s[32] = \"{w1}\"; strcat(s, \"{w2}\"); What does strlen(s) return?"
        v = len(w1) + len(w2)
        return stem, str(v), [str(len(w1)), str(len(w2)), str(v + 1), "32"], 2 + i // 4
    cmp = (w1 > w2) - (w1 < w2)
    sign = "positive" if cmp > 0 else "negative" if cmp < 0 else "zero"
    stem = f"Is strcmp(\"{w1}\", \"{w2}\") positive, negative or zero?"
    return stem, sign, ["positive", "negative", "zero", "undefined", "always 1"], 3 + i // 4


def fam_math(rng, i):
    x = round(rng.uniform(-9, 9), 1)
    if x == int(x):
        x += 0.5
    ops = [
        (f"floor({x})", math.floor(x)),
        (f"ceil({x})", math.ceil(x)),
        (f"(int)fabs({x})", int(abs(x))),
        (f"(int)pow(2, {abs(int(x)) + 1})", 2 ** (abs(int(x)) + 1)),
        (f"abs({int(x)} - 3)", abs(int(x) - 3)),
    ]
    e, v = ops[i % len(ops)]
    return f"What is the value of `{e}` (printed as an integer)?", str(int(v)), near_ints(rng, int(v), 2), 1 + i // 2


def fam_atoi(rng, i):
    n = rng.randint(10, 999)
    cases = [
        (f"atoi(\"{n}\")", n),
        (f"atoi(\"{n}abc\")", n),
        (f"atoi(\"abc{n}\")", 0),
        (f"atoi(\"  -{n}\")", -n),
        (f"atoi(\"{n}\") + atoi(\"{n % 10}\")", n + n % 10),
    ]
    e, v = cases[i % len(cases)]
    return f"What does `{e}` return?", str(v), [str(n), "0", str(-n), str(v + 1), str(n * 10)], 1 + i // 2


FAMILIES = {
    "T1-01": fam_operators, "T1-02": fam_printf, "T1-03": fam_cast, "T1-04": fam_numeral, "T1-05": fam_assign,
    "T1-06": fam_cast, "T1-07": fam_operators, "T1-08": fam_printf, "T1-09": fam_branch, "T1-10": fam_for,
    "T1-11": fam_while, "T1-12": fam_macro, "T1-13": fam_recursion, "T1-14": fam_array,
    "T2-01": fam_pointer, "T2-02": fam_sort1, "T2-03": fam_sort2, "T2-04": fam_search, "T2-05": fam_struct,
    "T2-06": fam_text_file, "T2-07": fam_binary_file, "T2-08": fam_static, "T2-09": fam_malloc,
    "T2-10": fam_pixels, "T2-11": fam_bits, "T2-12": fam_string, "T2-13": fam_math, "T2-14": fam_atoi,
}


def make_question(rng, qid, lesson, stem, correct, pool, difficulty):
    wrong = distractors(rng, correct, pool)
    choices = wrong + [correct]
    rng.shuffle(choices)
    return {
        "id": qid,
        "lesson_id": lesson,
        "stem": stem,
        "choices": choices,
        "correct_index": choices.index(correct),
        "difficulty": max(1, min(5, difficulty)),
        "choice_priority": 50,
        "answering_time_seconds": 30 + 15 * max(1, min(5, difficulty)),
    }


def build(term, titles, rng, variants):
    questions = []
    for index, _ in enumerate(titles, start=1):
        lesson = f"T{term}-{index:02d}"
        n = 0
        for stem, correct, wrong, difficulty in CONCEPTS[lesson]:
            n += 1
            questions.append(make_question(rng, f"{lesson}-q{n:02d}", lesson, stem, correct, wrong, difficulty))
        family = FAMILIES[lesson]
        made = 0
        attempt = 0
        stems = {q["stem"] for q in questions}
        while made < variants:
            stem, correct, pool, difficulty = family(rng, made if attempt < 50 else made + attempt)
            attempt += 1
            if stem in stems:
                continue
            stems.add(stem)
            n += 1
            made += 1
            questions.append(make_question(rng, f"{lesson}-q{n:02d}", lesson, stem, correct, pool, difficulty))
    return questions


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "banks")
    parser.add_argument("--seed", type=int, default=2013)
    parser.add_argument("--variants", type=int, default=9, help="generated questions per lesson")
    args = parser.parse_args()
    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for term, titles in ((1, TERM1), (2, TERM2)):
        questions = build(term, titles, rng, args.variants)
        path = args.out / f"term{term}.questions.json"
        path.write_text(json.dumps(questions, indent=2, ensure_ascii=False) + "\n")
        print(f"{path}: {len(questions)} questions")


if __name__ == "__main__":
    main()
