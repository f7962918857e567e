class Report {
public:
  double total(double a, double b){
    double sum = a + b;
    double rounded = sum * 100;
    return rounded;
  }
};
