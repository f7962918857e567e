class Report {
public:
  double total(double a, double b){
    double sum = a + b;
    return round2(sum);
  }
  double round2(double sum){
    double rounded = sum * 100;
    return rounded;
  }
};
