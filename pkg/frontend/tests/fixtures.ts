export const CAR_UVL = [
  "features",
  "\tCar",
  "\t\tmandatory",
  "\t\t\tEngine",
  "\t\t\t\talternative",
  "\t\t\t\t\tGas",
  "\t\t\t\t\tElectric",
  "\t\toptional",
  "\t\t\tRadio",
  "constraints",
  "\tRadio => Electric",
].join("\n") + "\n";
