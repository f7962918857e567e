class Geometry {
public:
  double area(double r){
    return 3.14 * r * r;
  }
};
