"""Classic 256-case marching-cubes tables (generated by tools/generate_mc_table.py).

Corner c at (c & 1, (c >> 1) & 1, (c >> 2) & 1); config bit c set when the
corner value is below the iso level. Triangles are wound so normals point
toward increasing field values."""

EDGE_CORNERS = (
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
)

TRI_TABLE = (
    (),  #   0
    (0, 4, 8),  #   1
    (5, 0, 9),  #   2
    (4, 8, 9, 4, 9, 5),  #   3
    (1, 10, 4),  #   4
    (1, 10, 8, 1, 8, 0),  #   5
    (9, 5, 1, 10, 9, 1, 9, 4, 0, 9, 10, 4),  #   6
    (9, 5, 1, 10, 9, 1, 8, 9, 10),  #   7
    (11, 1, 5),  #   8
    (8, 0, 5, 11, 8, 5, 8, 1, 4, 8, 11, 1),  #   9
    (0, 9, 11, 0, 11, 1),  #  10
    (11, 1, 4, 8, 11, 4, 9, 11, 8),  #  11
    (10, 4, 5, 10, 5, 11),  #  12
    (8, 0, 5, 11, 8, 5, 10, 8, 11),  #  13
    (10, 4, 0, 9, 10, 0, 11, 10, 9),  #  14
    (9, 10, 8, 11, 10, 9),  #  15
    (6, 2, 8),  #  16
    (0, 4, 6, 0, 6, 2),  #  17
    (6, 2, 9, 5, 6, 9, 6, 0, 8, 6, 5, 0),  #  18
    (6, 2, 9, 5, 6, 9, 4, 6, 5),  #  19
    (2, 8, 4, 1, 2, 4, 2, 10, 6, 2, 1, 10),  #  20
    (1, 10, 6, 2, 1, 6, 0, 1, 2),  #  21
    (9, 5, 2, 5, 1, 2, 1, 6, 2, 6, 1, 10, 4, 0, 8),  #  22
    (5, 1, 9, 9, 1, 2, 1, 10, 2, 10, 6, 2),  #  23
    (6, 2, 8, 5, 11, 1),  #  24
    (11, 2, 0, 5, 11, 0, 11, 6, 2, 4, 11, 1, 11, 4, 6),  #  25
    (6, 1, 0, 8, 6, 0, 6, 11, 1, 9, 6, 2, 6, 9, 11),  #  26
    (9, 11, 2, 11, 4, 2, 4, 6, 2, 4, 11, 1),  #  27
    (2, 11, 10, 6, 2, 10, 2, 5, 11, 4, 2, 8, 2, 4, 5),  #  28
    (11, 10, 6, 0, 11, 6, 2, 0, 6, 5, 11, 0),  #  29
    (0, 8, 4, 2, 10, 6, 2, 9, 10, 9, 11, 10),  #  30
    (2, 9, 6, 9, 10, 6, 9, 11, 10),  #  31
    (7, 9, 2),  #  32
    (7, 9, 0, 4, 7, 0, 7, 8, 2, 7, 4, 8),  #  33
    (5, 0, 2, 5, 2, 7),  #  34
    (4, 8, 2, 7, 4, 2, 5, 4, 7),  #  35
    (7, 9, 2, 4, 1, 10),  #  36
    (7, 10, 8, 2, 7, 8, 7, 1, 10, 0, 7, 9, 7, 0, 1),  #  37
    (10, 7, 5, 1, 10, 5, 10, 2, 7, 0, 10, 4, 10, 0, 2),  #  38
    (7, 5, 2, 5, 10, 2, 10, 8, 2, 5, 1, 10),  #  39
    (2, 7, 11, 1, 2, 11, 2, 5, 9, 2, 1, 5),  #  40
    (2, 7, 8, 7, 11, 8, 11, 4, 8, 4, 11, 1, 5, 9, 0),  #  41
    (2, 7, 11, 1, 2, 11, 0, 2, 1),  #  42
    (11, 1, 4, 11, 4, 8, 7, 11, 8, 2, 7, 8),  #  43
    (2, 4, 5, 9, 2, 5, 2, 10, 4, 11, 2, 7, 2, 11, 10),  #  44
    (5, 9, 0, 7, 8, 2, 7, 11, 8, 11, 10, 8),  #  45
    (0, 2, 7, 10, 0, 7, 11, 10, 7, 0, 10, 4),  #  46
    (7, 11, 2, 11, 8, 2, 11, 10, 8),  #  47
    (7, 9, 8, 7, 8, 6),  #  48
    (7, 9, 0, 4, 7, 0, 6, 7, 4),  #  49
    (5, 0, 8, 6, 5, 8, 7, 5, 6),  #  50
    (7, 4, 6, 7, 5, 4),  #  51
    (1, 9, 8, 4, 1, 8, 1, 7, 9, 6, 1, 10, 1, 6, 7),  #  52
    (6, 7, 10, 7, 0, 10, 0, 1, 10, 0, 7, 9),  #  53
    (4, 0, 8, 5, 10, 6, 7, 5, 6, 1, 10, 5),  #  54
    (10, 6, 1, 6, 5, 1, 6, 7, 5),  #  55
    (1, 6, 7, 11, 1, 7, 1, 8, 6, 9, 1, 5, 1, 9, 8),  #  56
    (5, 9, 0, 7, 1, 4, 6, 7, 4, 11, 1, 7),  #  57
    (1, 0, 8, 7, 1, 8, 6, 7, 8, 11, 1, 7),  #  58
    (1, 4, 11, 4, 7, 11, 4, 6, 7),  #  59
    (7, 10, 6, 11, 10, 7, 9, 8, 4, 5, 9, 4),  #  60
    (10, 6, 11, 6, 7, 11, 0, 5, 9),  #  61
    (7, 11, 6, 11, 10, 6, 0, 8, 4),  #  62
    (7, 11, 6, 6, 11, 10),  #  63
    (10, 3, 6),  #  64
    (0, 4, 10, 3, 0, 10, 0, 6, 8, 0, 3, 6),  #  65
    (10, 3, 6, 9, 5, 0),  #  66
    (3, 5, 4, 10, 3, 4, 3, 9, 5, 8, 3, 6, 3, 8, 9),  #  67
    (3, 6, 4, 3, 4, 1),  #  68
    (3, 6, 8, 0, 3, 8, 1, 3, 0),  #  69
    (9, 6, 4, 0, 9, 4, 9, 3, 6, 1, 9, 5, 9, 1, 3),  #  70
    (1, 3, 6, 9, 1, 6, 8, 9, 6, 1, 9, 5),  #  71
    (6, 10, 1, 5, 6, 1, 6, 11, 3, 6, 5, 11),  #  72
    (8, 0, 6, 0, 5, 6, 5, 3, 6, 3, 5, 11, 1, 4, 10),  #  73
    (6, 9, 11, 3, 6, 11, 6, 0, 9, 1, 6, 10, 6, 1, 0),  #  74
    (10, 1, 4, 11, 6, 8, 9, 11, 8, 3, 6, 11),  #  75
    (5, 11, 3, 6, 5, 3, 4, 5, 6),  #  76
    (5, 11, 3, 5, 3, 6, 0, 5, 6, 8, 0, 6),  #  77
    (6, 4, 0, 11, 6, 0, 9, 11, 0, 3, 6, 11),  #  78
    (6, 8, 3, 8, 11, 3, 8, 9, 11),  #  79
    (10, 3, 2, 10, 2, 8),  #  80
    (0, 4, 10, 3, 0, 10, 2, 0, 3),  #  81
    (5, 3, 2, 9, 5, 2, 5, 10, 3, 8, 5, 0, 5, 8, 10),  #  82
    (3, 2, 10, 2, 5, 10, 5, 4, 10, 2, 9, 5),  #  83
    (2, 8, 4, 1, 2, 4, 3, 2, 1),  #  84
    (0, 3, 2, 0, 1, 3),  #  85
    (4, 0, 8, 5, 2, 9, 5, 1, 2, 1, 3, 2),  #  86
    (5, 1, 9, 1, 2, 9, 1, 3, 2),  #  87
    (5, 8, 10, 1, 5, 10, 5, 2, 8, 3, 5, 11, 5, 3, 2),  #  88
    (1, 4, 10, 0, 11, 3, 2, 0, 3, 5, 11, 0),  #  89
    (10, 0, 8, 1, 0, 10, 3, 2, 9, 11, 3, 9),  #  90
    (2, 9, 3, 9, 11, 3, 4, 10, 1),  #  91
    (4, 5, 8, 5, 3, 8, 3, 2, 8, 3, 5, 11),  #  92
    (11, 3, 5, 3, 0, 5, 3, 2, 0),  #  93
    (11, 3, 9, 3, 2, 9, 4, 0, 8),  #  94
    (2, 9, 3, 3, 9, 11),  #  95
    (10, 3, 7, 9, 10, 7, 10, 2, 6, 10, 9, 2),  #  96
    (10, 3, 4, 3, 7, 4, 7, 0, 4, 0, 7, 9, 2, 6, 8),  #  97
    (10, 0, 2, 6, 10, 2, 10, 5, 0, 7, 10, 3, 10, 7, 5),  #  98
    (6, 8, 2, 4, 3, 7, 5, 4, 7, 10, 3, 4),  #  99
    (9, 1, 3, 7, 9, 3, 9, 4, 1, 6, 9, 2, 9, 6, 4),  # 100
    (2, 6, 8, 3, 9, 0, 1, 3, 0, 7, 9, 3),  # 101
    (7, 5, 3, 5, 1, 3, 6, 0, 2, 6, 4, 0),  # 102
    (5, 1, 7, 1, 3, 7, 8, 2, 6),  # 103
    (6, 10, 2, 10, 1, 2, 1, 9, 2, 9, 1, 5, 11, 3, 7),  # 104
    (2, 6, 8, 0, 5, 9, 1, 4, 10, 11, 3, 7),  # 105
    (11, 3, 7, 10, 2, 6, 10, 1, 2, 1, 0, 2),  # 106
    (2, 6, 8, 1, 4, 10, 11, 3, 7),  # 107
    (7, 11, 3, 5, 2, 6, 4, 5, 6, 9, 2, 5),  # 108
    (8, 2, 6, 11, 3, 7, 5, 9, 0),  # 109
    (4, 0, 6, 0, 2, 6, 11, 3, 7),  # 110
    (6, 8, 2, 11, 3, 7),  # 111
    (10, 3, 7, 9, 10, 7, 8, 10, 9),  # 112
    (3, 7, 10, 10, 7, 4, 7, 9, 4, 9, 0, 4),  # 113
    (8, 10, 0, 10, 7, 0, 7, 5, 0, 7, 10, 3),  # 114
    (3, 7, 10, 7, 4, 10, 7, 5, 4),  # 115
    (9, 8, 7, 8, 1, 7, 1, 3, 7, 8, 4, 1),  # 116
    (9, 0, 7, 0, 3, 7, 0, 1, 3),  # 117
    (3, 7, 1, 7, 5, 1, 8, 4, 0),  # 118
    (3, 7, 1, 1, 7, 5),  # 119
    (11, 3, 7, 10, 5, 9, 8, 10, 9, 1, 5, 10),  # 120
    (10, 1, 4, 9, 0, 5, 7, 11, 3),  # 121
    (0, 8, 1, 8, 10, 1, 7, 11, 3),  # 122
    (1, 4, 10, 7, 11, 3),  # 123
    (8, 4, 9, 4, 5, 9, 3, 7, 11),  # 124
    (11, 3, 7, 0, 5, 9),  # 125
    (4, 0, 8, 11, 3, 7),  # 126
    (7, 11, 3),  # 127
    (11, 7, 3),  # 128
    (0, 4, 8, 3, 11, 7),  # 129
    (3, 11, 5, 0, 3, 5, 3, 9, 7, 3, 0, 9),  # 130
    (3, 8, 9, 7, 3, 9, 3, 4, 8, 5, 3, 11, 3, 5, 4),  # 131
    (4, 1, 11, 7, 4, 11, 4, 3, 10, 4, 7, 3),  # 132
    (7, 0, 1, 11, 7, 1, 7, 8, 0, 10, 7, 3, 7, 10, 8),  # 133
    (0, 9, 4, 9, 7, 4, 7, 10, 4, 10, 7, 3, 11, 5, 1),  # 134
    (1, 11, 5, 3, 9, 7, 3, 10, 9, 10, 8, 9),  # 135
    (7, 3, 1, 7, 1, 5),  # 136
    (8, 3, 1, 4, 8, 1, 8, 7, 3, 5, 8, 0, 8, 5, 7),  # 137
    (0, 9, 7, 3, 0, 7, 1, 0, 3),  # 138
    (8, 9, 7, 1, 8, 7, 3, 1, 7, 4, 8, 1),  # 139
    (7, 3, 10, 4, 7, 10, 5, 7, 4),  # 140
    (10, 8, 0, 7, 10, 0, 5, 7, 0, 10, 7, 3),  # 141
    (7, 3, 10, 7, 10, 4, 9, 7, 4, 0, 9, 4),  # 142
    (3, 10, 7, 10, 9, 7, 10, 8, 9),  # 143
    (8, 6, 3, 11, 8, 3, 8, 7, 2, 8, 11, 7),  # 144
    (11, 4, 6, 3, 11, 6, 11, 0, 4, 2, 11, 7, 11, 2, 0),  # 145
    (3, 11, 6, 11, 5, 6, 5, 8, 6, 8, 5, 0, 9, 7, 2),  # 146
    (9, 7, 2, 11, 6, 3, 11, 5, 6, 5, 4, 6),  # 147
    (4, 1, 8, 1, 11, 8, 11, 2, 8, 2, 11, 7, 3, 10, 6),  # 148
    (3, 10, 6, 1, 7, 2, 0, 1, 2, 11, 7, 1),  # 149
    (5, 1, 11, 3, 10, 6, 4, 0, 8, 7, 2, 9),  # 150
    (9, 7, 2, 10, 6, 3, 1, 11, 5),  # 151
    (8, 5, 7, 2, 8, 7, 8, 1, 5, 3, 8, 6, 8, 3, 1),  # 152
    (0, 7, 2, 5, 7, 0, 4, 6, 3, 1, 4, 3),  # 153
    (7, 2, 9, 6, 0, 8, 6, 3, 0, 3, 1, 0),  # 154
    (1, 4, 3, 4, 6, 3, 9, 7, 2),  # 155
    (10, 6, 3, 8, 7, 2, 8, 4, 7, 4, 5, 7),  # 156
    (0, 5, 2, 5, 7, 2, 10, 6, 3),  # 157
    (0, 8, 4, 3, 10, 6, 7, 2, 9),  # 158
    (3, 10, 6, 9, 7, 2),  # 159
    (9, 2, 3, 9, 3, 11),  # 160
    (4, 11, 9, 0, 4, 9, 4, 3, 11, 2, 4, 8, 4, 2, 3),  # 161
    (3, 11, 5, 0, 3, 5, 2, 3, 0),  # 162
    (5, 4, 8, 3, 5, 8, 2, 3, 8, 5, 3, 11),  # 163
    (4, 2, 3, 10, 4, 3, 4, 9, 2, 11, 4, 1, 4, 11, 9),  # 164
    (0, 1, 9, 1, 11, 9, 2, 10, 8, 2, 3, 10),  # 165
    (5, 1, 11, 4, 3, 10, 4, 0, 3, 0, 2, 3),  # 166
    (8, 2, 10, 2, 3, 10, 5, 1, 11),  # 167
    (1, 5, 9, 2, 1, 9, 3, 1, 2),  # 168
    (0, 5, 9, 1, 8, 2, 3, 1, 2, 4, 8, 1),  # 169
    (3, 0, 2, 1, 0, 3),  # 170
    (8, 2, 4, 2, 1, 4, 2, 3, 1),  # 171
    (2, 3, 10, 5, 2, 10, 4, 5, 10, 9, 2, 5),  # 172
    (3, 10, 2, 10, 8, 2, 5, 9, 0),  # 173
    (4, 0, 10, 0, 3, 10, 0, 2, 3),  # 174
    (3, 10, 2, 2, 10, 8),  # 175
    (8, 6, 3, 11, 8, 3, 9, 8, 11),  # 176
    (4, 6, 0, 6, 11, 0, 11, 9, 0, 6, 3, 11),  # 177
    (11, 5, 3, 3, 5, 6, 5, 0, 6, 0, 8, 6),  # 178
    (11, 5, 3, 5, 6, 3, 5, 4, 6),  # 179
    (3, 10, 6, 1, 8, 4, 1, 11, 8, 11, 9, 8),  # 180
    (9, 0, 11, 0, 1, 11, 6, 3, 10),  # 181
    (3, 10, 6, 0, 8, 4, 5, 1, 11),  # 182
    (10, 6, 3, 5, 1, 11),  # 183
    (3, 1, 6, 1, 9, 6, 9, 8, 6, 9, 1, 5),  # 184
    (6, 3, 4, 3, 1, 4, 9, 0, 5),  # 185
    (6, 3, 8, 3, 0, 8, 3, 1, 0),  # 186
    (6, 3, 4, 4, 3, 1),  # 187
    (5, 9, 4, 9, 8, 4, 3, 10, 6),  # 188
    (3, 10, 6, 5, 9, 0),  # 189
    (4, 0, 8, 3, 10, 6),  # 190
    (3, 10, 6),  # 191
    (11, 7, 6, 11, 6, 10),  # 192
    (0, 7, 6, 8, 0, 6, 0, 11, 7, 10, 0, 4, 0, 10, 11),  # 193
    (0, 10, 11, 5, 0, 11, 0, 6, 10, 7, 0, 9, 0, 7, 6),  # 194
    (10, 11, 4, 11, 5, 4, 8, 7, 6, 8, 9, 7),  # 195
    (4, 1, 11, 7, 4, 11, 6, 4, 7),  # 196
    (0, 1, 8, 1, 7, 8, 7, 6, 8, 1, 11, 7),  # 197
    (11, 5, 1, 9, 4, 0, 9, 7, 4, 7, 6, 4),  # 198
    (6, 8, 7, 8, 9, 7, 1, 11, 5),  # 199
    (6, 10, 1, 5, 6, 1, 7, 6, 5),  # 200
    (1, 4, 10, 0, 6, 8, 0, 5, 6, 5, 7, 6),  # 201
    (7, 6, 10, 0, 7, 10, 1, 0, 10, 7, 0, 9),  # 202
    (9, 7, 8, 7, 6, 8, 1, 4, 10),  # 203
    (4, 7, 6, 5, 7, 4),  # 204
    (0, 5, 8, 5, 6, 8, 5, 7, 6),  # 205
    (9, 7, 0, 7, 4, 0, 7, 6, 4),  # 206
    (9, 7, 8, 8, 7, 6),  # 207
    (11, 7, 2, 8, 11, 2, 10, 11, 8),  # 208
    (2, 0, 7, 0, 10, 7, 10, 11, 7, 10, 0, 4),  # 209
    (9, 7, 2, 11, 0, 8, 10, 11, 8, 5, 0, 11),  # 210
    (4, 10, 5, 10, 11, 5, 2, 9, 7),  # 211
    (1, 11, 4, 4, 11, 8, 11, 7, 8, 7, 2, 8),  # 212
    (7, 2, 11, 2, 1, 11, 2, 0, 1),  # 213
    (4, 0, 8, 7, 2, 9, 11, 5, 1),  # 214
    (7, 2, 9, 1, 11, 5),  # 215
    (5, 7, 2, 10, 5, 2, 8, 10, 2, 1, 5, 10),  # 216
    (7, 2, 5, 2, 0, 5, 10, 1, 4),  # 217
    (10, 1, 8, 1, 0, 8, 7, 2, 9),  # 218
    (9, 7, 2, 1, 4, 10),  # 219
    (8, 4, 2, 4, 7, 2, 4, 5, 7),  # 220
    (0, 5, 2, 2, 5, 7),  # 221
    (9, 7, 2, 4, 0, 8),  # 222
    (9, 7, 2),  # 223
    (9, 2, 6, 10, 9, 6, 11, 9, 10),  # 224
    (8, 2, 6, 9, 4, 10, 11, 9, 10, 0, 4, 9),  # 225
    (10, 11, 6, 11, 0, 6, 0, 2, 6, 11, 5, 0),  # 226
    (11, 5, 10, 5, 4, 10, 2, 6, 8),  # 227
    (11, 9, 2, 4, 11, 2, 6, 4, 2, 11, 4, 1),  # 228
    (1, 11, 0, 11, 9, 0, 6, 8, 2),  # 229
    (2, 6, 0, 6, 4, 0, 11, 5, 1),  # 230
    (2, 6, 8, 11, 5, 1),  # 231
    (1, 5, 9, 1, 9, 2, 10, 1, 2, 6, 10, 2),  # 232
    (6, 8, 2, 5, 9, 0, 1, 4, 10),  # 233
    (10, 1, 6, 1, 2, 6, 1, 0, 2),  # 234
    (8, 2, 6, 1, 4, 10),  # 235
    (2, 6, 9, 6, 5, 9, 6, 4, 5),  # 236
    (2, 6, 8, 5, 9, 0),  # 237
    (4, 0, 6, 6, 0, 2),  # 238
    (2, 6, 8),  # 239
    (10, 9, 8, 10, 11, 9),  # 240
    (4, 10, 0, 10, 9, 0, 10, 11, 9),  # 241
    (0, 8, 5, 8, 11, 5, 8, 10, 11),  # 242
    (4, 10, 5, 5, 10, 11),  # 243
    (1, 11, 4, 11, 8, 4, 11, 9, 8),  # 244
    (9, 0, 11, 11, 0, 1),  # 245
    (0, 8, 4, 11, 5, 1),  # 246
    (1, 11, 5),  # 247
    (5, 9, 1, 9, 10, 1, 9, 8, 10),  # 248
    (5, 9, 0, 10, 1, 4),  # 249
    (10, 1, 8, 8, 1, 0),  # 250
    (10, 1, 4),  # 251
    (8, 4, 9, 9, 4, 5),  # 252
    (0, 5, 9),  # 253
    (4, 0, 8),  # 254
    (),  # 255
)
