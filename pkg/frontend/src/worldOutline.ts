// Bundled static world outline: deliberately coarse continent polygons as
// [lon, lat] rings. No tile service, no network; demos work offline. The
// dots carry the information, this is just orientation.

export type Ring = Array<[number, number]>;

export const WORLD_OUTLINE: Ring[] = [
  // North America
  [
    [-168, 66], [-158, 71], [-140, 70], [-125, 72], [-110, 73], [-95, 72],
    [-82, 70], [-75, 62], [-60, 56], [-65, 47], [-70, 42], [-76, 35],
    [-81, 31], [-80, 26], [-90, 29], [-97, 26], [-97, 20], [-105, 20],
    [-110, 23], [-117, 33], [-124, 40], [-125, 49], [-132, 55], [-145, 60],
    [-155, 58], [-165, 55], [-168, 60],
  ],
  // South America
  [
    [-81, 9], [-75, 11], [-62, 10], [-52, 5], [-45, -1], [-35, -6],
    [-38, -13], [-40, -22], [-48, -28], [-53, -34], [-58, -39], [-65, -41],
    [-66, -47], [-69, -52], [-74, -50], [-73, -44], [-71, -37], [-70, -30],
    [-70, -18], [-75, -14], [-81, -6], [-80, 1],
  ],
  // Europe
  [
    [-10, 36], [-9, 43], [-5, 48], [1, 50], [5, 53], [8, 57], [5, 62],
    [12, 65], [20, 70], [30, 70], [40, 66], [42, 60], [30, 55], [28, 50],
    [20, 46], [15, 44], [20, 40], [25, 38], [22, 37], [15, 38], [12, 44],
    [4, 43], [-2, 36],
  ],
  // Africa
  [
    [-17, 15], [-17, 21], [-10, 30], [0, 36], [10, 37], [20, 32], [32, 31],
    [35, 27], [43, 11], [51, 12], [45, 1], [40, -10], [35, -20], [32, -29],
    [25, -34], [18, -34], [15, -26], [12, -18], [9, -7], [9, 4], [0, 6],
    [-8, 5], [-13, 9],
  ],
  // Asia
  [
    [42, 60], [50, 68], [60, 70], [75, 72], [90, 74], [110, 76], [130, 72],
    [145, 70], [160, 68], [178, 66], [170, 60], [160, 58], [155, 52],
    [142, 46], [135, 43], [130, 40], [126, 35], [122, 30], [118, 24],
    [108, 14], [105, 9], [100, 6], [98, 12], [92, 16], [88, 22], [80, 15],
    [77, 8], [73, 15], [70, 22], [66, 25], [57, 26], [55, 24], [52, 28],
    [48, 30], [44, 38], [36, 36], [28, 41], [30, 47], [40, 48], [47, 48],
    [50, 52],
  ],
  // Australia
  [
    [114, -22], [114, -30], [116, -35], [124, -33], [130, -32], [136, -35],
    [140, -38], [147, -39], [150, -37], [153, -30], [153, -25], [148, -20],
    [143, -14], [137, -12], [132, -12], [126, -14], [122, -18],
  ],
  // Greenland
  [
    [-45, 60], [-53, 66], [-55, 71], [-50, 76], [-40, 79], [-25, 82],
    [-18, 79], [-20, 74], [-25, 70], [-32, 66], [-40, 62],
  ],
];
